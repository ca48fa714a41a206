"""Supervised Cadre Models.

Copyright (c) 2025 Asymworks, LLC.
All Rights Reserved.
"""

__NAME__ = 'Cadres'
__version__ = '0.1.0'
