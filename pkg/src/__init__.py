"""
Nonlocal Hirota Asymptotics
Core package initialization
"""
