from .models import *
from .errors import *
