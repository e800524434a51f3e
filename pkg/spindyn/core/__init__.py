"""
spindyn Core Components: Data Models and Interfaces.

Components:
- models: frozen dataclasses shared by every layer
- interfaces: abstract contracts between services, writers and the front end
"""
