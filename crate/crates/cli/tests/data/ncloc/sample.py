#!/usr/bin/env python3
"""Count vowels.

Reads one line."""
import sys  # stdin

VOWELS = "aeiou#"  # '#' inside the string

    
def count(line):
    # lower-case first
    line = line.lower()
    return sum(1 for c in line if c in VOWELS)


text = '''
# not a comment, inside a string
'''
print(count(sys.stdin.readline()))
# end
