"""pufkit - lightweight SRAM PUF key generation toolkit."""

__version__ = "1.0.0"
__license__ = "MIT"
