from .build import *
from .matching import *
from .flow import *
from .diagnostics import *
