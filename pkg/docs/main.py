import simident


def define_env(env):
    env.variables["package_version"] = simident.__version__
