from .metrics import *
from .experiment import *
