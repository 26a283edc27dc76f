""" Compactly supported cone-adapted shearlet frames
"""

__version__ = "0.1"
