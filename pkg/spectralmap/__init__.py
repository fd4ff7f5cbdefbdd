from . import _global as g
from ._base import *
from ._exceptions import *
from ._forward import *
from ._inverse import *
from ._io import *
from ._kernels import *
from ._stability import *
