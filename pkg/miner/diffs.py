"""
Unified diff reading: line churn and added library imports for one file.
"""
import re

from corpus.imports import detect_client_files

HUNK_RE = re.compile(r'^@@ -\d+(?:,(?P<old>\d+))? \+\d+(?:,(?P<new>\d+))? @@')


def hunk_lines(diff_text):
    """
    Yield (sign, text) for every line inside a hunk

    Lines outside hunks (diff --git, index, ---/+++ headers, "Binary files
    differ") are skipped; hunk lengths come from the @@ headers, so an added
    line that itself starts with "++" is still an addition.
    """
    old_left = new_left = 0
    for line in diff_text.splitlines():
        if old_left <= 0 and new_left <= 0:
            match = HUNK_RE.match(line)
            if match:
                old_left = int(match.group('old') if match.group('old') is not None else 1)
                new_left = int(match.group('new') if match.group('new') is not None else 1)
            continue

        sign, text = line[:1], line[1:]
        if sign == '+':
            new_left -= 1
        elif sign == '-':
            old_left -= 1
        elif sign == ' ' or line == '':
            old_left -= 1
            new_left -= 1
        elif sign == '\\':
            # "\ No newline at end of file"
            continue
        else:
            old_left = new_left = 0
            continue
        yield sign, text


def line_churn(diff_text):
    """(added, deleted) line counts of a unified diff"""
    added = deleted = 0
    for sign, _ in hunk_lines(diff_text):
        if sign == '+':
            added += 1
        elif sign == '-':
            deleted += 1
    return added, deleted


def count_added_imports(diff, lib):
    """Number of added lines that import the library"""
    return sum(
        1 for sign, text in hunk_lines(diff)
        if sign == '+' and detect_client_files(text, lib)
    )
