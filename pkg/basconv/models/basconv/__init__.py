from .BasConv import BasConv
