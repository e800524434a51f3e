"""
spindyn command-line front end.
"""
