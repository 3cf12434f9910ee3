from .build import *
from .presets import *
from .value import *
