# Context defaults (2 is a primitive root mod 9)
DEFAULT_PRIME = 3
DEFAULT_GENERATOR = 2

# Instance files
SCHEMA_VERSION = "1"
OUTPUT_FORMATS = ("json", "ascii")
DEFAULT_OUTPUT = "json"

# Logging configuration
LOGGING_LEVEL = "WARNING"

# Resolution certificates unroll the operator action over t-degrees 0..UNROLL_DEGREE
UNROLL_DEGREE = 2

# Ext vanishes above MAX_EXT_DEGREE; spectral sequence charts
DEFAULT_T_WINDOW = (-8, 8)
MAX_EXT_DEGREE = 2

# Instance generator
DEFAULT_SEED = 0
DEFAULT_GEN_SIZE = 3
