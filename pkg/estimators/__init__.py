from .build import *
from .fluid import *
from .sample import *
from .report import *
