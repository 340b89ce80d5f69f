import json
from pathlib import Path

from rest_framework import serializers

from .exceptions import CorpusFormatError
from .records import ClientProject, DependencyEvidence, HeadSnapshot, LibrarySpec


class LibrarySpecSerializer(serializers.Serializer):
    """Serializer for target library declarations"""

    id = serializers.RegexField(r'^[A-Za-z0-9_.-]+$', max_length=100)
    manifest_name = serializers.CharField(trim_whitespace=False)
    repo_slug = serializers.CharField(required=False, allow_blank=True, default='')
    import_patterns = serializers.ListField(
        child=serializers.CharField(trim_whitespace=False),
        required=False,
        allow_empty=True,
        default=list,
    )

    def validate_manifest_name(self, value):
        if any(ch.isspace() for ch in value):
            raise serializers.ValidationError("manifest_name must not contain whitespace")
        return value

    def validate_import_patterns(self, value):
        for pattern in value:
            if not pattern or pattern.endswith('/') or any(ch.isspace() for ch in pattern):
                raise serializers.ValidationError(f"Invalid import pattern: {pattern!r}")
        return value

    def create(self, validated_data):
        return LibrarySpec(
            id=validated_data['id'],
            manifest_name=validated_data['manifest_name'],
            repo_slug=validated_data.get('repo_slug', ''),
            import_patterns=tuple(validated_data.get('import_patterns') or ()),
        )


class DependencyEvidenceSerializer(serializers.Serializer):
    path = serializers.CharField()
    kind = serializers.ChoiceField(choices=['package.json', 'bower.json'])
    section = serializers.CharField()


class HeadSnapshotSerializer(serializers.Serializer):
    commit = serializers.RegexField(r'^[0-9a-f]{40}$')
    timestamp = serializers.DateTimeField()


class ClientProjectSerializer(serializers.Serializer):
    """Serializer for corpus.json records"""

    repo_id = serializers.CharField()
    manifest_evidence = DependencyEvidenceSerializer(many=True, allow_empty=False)
    client_files = serializers.ListField(child=serializers.CharField(), allow_empty=True)
    head_snapshot = HeadSnapshotSerializer()

    def validate_client_files(self, value):
        if len(set(value)) != len(value):
            raise serializers.ValidationError("client_files must be unique")
        if any(path.startswith('/') for path in value):
            raise serializers.ValidationError("client_files must be repository-relative")
        return value

    def create(self, validated_data):
        return ClientProject(
            repo_id=validated_data['repo_id'],
            manifest_evidence=tuple(DependencyEvidence(**e) for e in validated_data['manifest_evidence']),
            client_files=tuple(validated_data['client_files']),
            head_snapshot=HeadSnapshot(**validated_data['head_snapshot']),
        )


def dump_corpus(projects, path):
    """Write corpus.json"""
    data = ClientProjectSerializer(projects, many=True).data
    Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + '\n')


def load_corpus(path):
    """Read corpus.json back into ClientProject records"""
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise CorpusFormatError(f"Cannot read corpus {path}: {e}") from e

    serializer = ClientProjectSerializer(data=payload, many=True)
    if not serializer.is_valid():
        raise CorpusFormatError(f"Invalid corpus {path}: {serializer.errors}")
    return serializer.save()
