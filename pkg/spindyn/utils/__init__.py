"""
spindyn Utilities: configuration, validation, error handling, file output,
performance monitoring and version information.
"""
