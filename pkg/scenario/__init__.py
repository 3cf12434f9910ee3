from .rideshare import *
from .supply_chain import *
