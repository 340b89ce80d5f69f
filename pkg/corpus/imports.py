"""
Lexical detection of library imports in JavaScript source.

Two statement families are recognised: CommonJS `require('<p>')` calls and ES
module `import ... from '<p>'` / bare `import '<p>'` statements. Comments are
not stripped, so a commented-out import still counts.
"""
import posixpath
import re

REQUIRE_RE = re.compile(r"""\brequire\s*\(\s*(['"])(?P<path>[^'"\n]+)\1\s*\)""")
IMPORT_FROM_RE = re.compile(r"""\bimport\b[^'";]*?\bfrom\s*(['"])(?P<path>[^'"\n]+)\1""")
BARE_IMPORT_RE = re.compile(r"""\bimport\s*(['"])(?P<path>[^'"\n]+)\1""")

IMPORT_PATTERNS = (REQUIRE_RE, IMPORT_FROM_RE, BARE_IMPORT_RE)

# Same heuristic git uses to call a blob binary
BINARY_SNIFF_BYTES = 8000


def import_paths(text):
    """Yield every module path imported or required by the text"""
    for pattern in IMPORT_PATTERNS:
        for match in pattern.finditer(text):
            yield match.group('path')


def matches_library(module_path, lib):
    """True when module_path is one of lib's import patterns or a subpath of one"""
    return any(
        module_path == pattern or module_path.startswith(pattern + '/')
        for pattern in lib.import_patterns
    )


def detect_client_files(file_content, lib):
    """True iff the source text imports the library at least once"""
    return any(matches_library(path, lib) for path in import_paths(file_content))


def is_binary(data):
    return b'\x00' in data[:BINARY_SNIFF_BYTES]


def decode_source(data):
    """Decode blob bytes to text, or None for binary content"""
    if is_binary(data):
        return None
    return data.decode('utf-8', errors='replace')


def is_source_path(path, extensions):
    return posixpath.splitext(path)[1].lower() in extensions


def is_vendored(path, vendored_dirs):
    return any(part in vendored_dirs for part in path.split('/')[:-1])
