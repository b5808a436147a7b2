# -*- coding: utf-8 -*-
"""
Adversarial robustness toolkit for machine learning PE malware detectors
"""

__version__ = "0.1.0"
