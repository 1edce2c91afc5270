"""
Test package for ddos5g.
"""
