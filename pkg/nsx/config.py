import os


class Config:
    DEFAULT_PRECISION_BITS = int(os.environ.get('NSX_PRECISION_BITS', 256))
    GEOMETRY_PRECISION_BITS = int(os.environ.get('NSX_GEOMETRY_BITS', 128))
    SOLVER_PRECISION_BITS = 64
    DEFAULT_TOLERANCE = float(os.environ.get('NSX_TOLERANCE', 1e-20))
    GEOMETRY_TOLERANCE = 1e-24
    PADE_BITS_PER_INDEX = 16
    PADE_MAX_RETRIES = 3
    QUAD_MAX_DEGREE = 10
    SQRT_MAX_BISECTIONS = 40
    ARC_MAX_STEP = 0.02
    TRACE_STOP_RADIUS = 1e-3
    TRACE_MAX_LENGTH = 20.0
    COLLISION_TOL = 1e-8
    SPECIAL_DIVISOR_TOL = 1e-6
    CONTOUR_CLEARANCE = 1e-6
    TUBE_WIDTH = 0.05
    GENUS_CAP = 2
    EPSILON = float(os.environ.get('NSX_EPSILON', 0.01))
    LM_MAX_ITERATIONS = 200
    LM_POLISH_ITERATIONS = 12
    FD_RELATIVE_STEP = 1e-20
    PERIOD_TOLERANCE = 1e-8
    THETA_TOLERANCE = 1e-30
    OUTPUT_DIGITS = 30
    OUTPUT_DIR = os.environ.get('NSX_OUTPUT_DIR', 'out')


class DevelopmentConfig(Config):
    DEBUG = True
    TESTING = False


class ProductionConfig(Config):
    DEBUG = False
    TESTING = False


class TestingConfig(Config):
    DEBUG = True
    TESTING = True
    DEFAULT_PRECISION_BITS = 192


config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(name=None):
    return config.get(name or os.environ.get('NSX_ENV', 'default'), DevelopmentConfig)
