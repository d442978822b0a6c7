"""
Test suite for symstress
"""
