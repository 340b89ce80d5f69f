"""
Dependency manifest parsing for the two JavaScript package managers that
declare client projects: npm (package.json) and Bower (bower.json).
"""
import codecs
import json
import posixpath

from .exceptions import ManifestParseError, UnsupportedManifestError
from .records import DependencyEvidence

# Runtime sections first; the first section that declares the library is reported
MANIFEST_SECTIONS = {
    'package.json': ('dependencies', 'devDependencies', 'peerDependencies', 'optionalDependencies'),
    'bower.json': ('dependencies', 'devDependencies'),
}


def manifest_kind(path):
    """
    Return the manifest kind for a repository path

    Raises:
        UnsupportedManifestError: for any file other than package.json / bower.json
    """
    kind = posixpath.basename(path)
    if kind not in MANIFEST_SECTIONS:
        raise UnsupportedManifestError(
            f"Unsupported manifest format: {path}. Supported: {', '.join(MANIFEST_SECTIONS)}"
        )
    return kind


def parse_manifest(content, lib, path='package.json'):
    """
    Look for the library among the declared dependencies of a manifest

    Args:
        content: Manifest bytes (or already decoded text)
        lib: LibrarySpec of the target library
        path: Repository path of the manifest; its basename selects the format

    Returns:
        DependencyEvidence when lib.manifest_name is a key of a dependency
        section, None otherwise

    Raises:
        ManifestParseError: malformed manifest, with the byte offset of the fault
        UnsupportedManifestError: unknown manifest format
    """
    kind = manifest_kind(path)
    document = load_manifest(content)

    for section in MANIFEST_SECTIONS[kind]:
        dependencies = document.get(section)
        if isinstance(dependencies, dict) and lib.manifest_name in dependencies:
            return DependencyEvidence(path=path, kind=kind, section=section)
    return None


def load_manifest(content):
    """Decode a manifest into a dict, reporting faults as byte offsets"""
    if isinstance(content, str):
        text, prefix = content, 0
    else:
        prefix = len(codecs.BOM_UTF8) if content.startswith(codecs.BOM_UTF8) else 0
        try:
            text = content[prefix:].decode('utf-8')
        except UnicodeDecodeError as exc:
            raise ManifestParseError(f"Manifest is not UTF-8 at byte {prefix + exc.start}", prefix + exc.start) from exc

    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        offset = prefix + len(text[:exc.pos].encode('utf-8'))
        raise ManifestParseError(f"{exc.msg} at byte {offset}", offset) from exc

    if not isinstance(document, dict):
        raise ManifestParseError("Manifest root must be a JSON object", prefix)
    return document
