from .build import *
from .rides import *
