from .build import *
from .draws import *
from .cycle import *
from .stats import *
from .sweep import *
