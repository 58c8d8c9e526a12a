#!/usr/bin/env python3
"""
moldgate - Injection gate placement and sizing for triangulated parts.

This is the entry point script. The actual implementation is in the moldgate package.
"""

from moldgate import main

if __name__ == "__main__":
    exit(main())
