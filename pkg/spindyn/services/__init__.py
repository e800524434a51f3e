"""
spindyn Services: regime drivers and batch execution.
"""
