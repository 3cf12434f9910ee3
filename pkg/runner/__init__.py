from .build import *
from . import fluid, scenarios, simulate
