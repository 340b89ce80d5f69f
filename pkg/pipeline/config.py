"""
Pipeline configuration: a YAML document validated by PipelineConfigSerializer.
"""
import logging
from dataclasses import dataclass, field
from datetime import timezone
from pathlib import Path

import yaml
from rest_framework import serializers

from corpus.serializers import LibrarySpecSerializer
from learn.classifiers import KINDS
from learn.labels import FIVE, TERNARY
from libexpert.exceptions import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass
class PipelineConfig:
    libraries: list
    repos: dict
    snapshot: object
    output: Path
    identity: str = 'offline'
    ground_truth: Path = None
    scheme: str = TERNARY
    classifiers: list = field(default_factory=lambda: list(KINDS))
    k_max: int = None
    expert_threshold: float = None
    seed: int = None
    forest_grid: dict = None
    svm_grid: dict = None
    kmeans_restarts: int = None

    def to_document(self):
        """JSON-ready form recorded in manifest.json and the run ledger"""
        return {
            'libraries': [
                {'id': lib.id, 'manifest_name': lib.manifest_name, 'repo_slug': lib.repo_slug,
                 'import_patterns': list(lib.import_patterns)}
                for lib in self.libraries
            ],
            'repos': {key: str(value) if isinstance(value, Path) else value for key, value in self.repos.items()},
            'snapshot': self.snapshot.astimezone(timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ'),
            'output': str(self.output),
            'identity': self.identity,
            'ground_truth': str(self.ground_truth) if self.ground_truth else None,
            'scheme': self.scheme,
            'classifiers': list(self.classifiers),
            'k_max': self.k_max,
            'expert_threshold': self.expert_threshold,
            'seed': self.seed,
            'forest_grid': self.forest_grid,
            'svm_grid': self.svm_grid,
            'kmeans_restarts': self.kmeans_restarts,
        }


class RepoSourceSerializer(serializers.Serializer):
    source = serializers.ChoiceField(choices=['directory', 'list', 'remote'])
    path = serializers.CharField(required=False)
    clone_root = serializers.CharField(required=False)
    fetch = serializers.BooleanField(required=False, default=False)
    language = serializers.CharField(required=False, default='JavaScript')
    limit = serializers.IntegerField(required=False, min_value=1, max_value=1000, default=1000)

    def validate(self, data):
        if data['source'] in ('directory', 'list') and not data.get('path'):
            raise serializers.ValidationError(f"{data['source']} sources need a path")
        if data['source'] == 'remote' and not data.get('clone_root'):
            raise serializers.ValidationError("remote sources need a clone_root")
        return data


class PipelineConfigSerializer(serializers.Serializer):
    """Serializer for the pipeline configuration document"""

    libraries = LibrarySpecSerializer(many=True, allow_empty=False)
    repos = RepoSourceSerializer()
    snapshot = serializers.DateTimeField()
    output = serializers.CharField()
    identity = serializers.ChoiceField(choices=['offline', 'remote'], default='offline')
    ground_truth = serializers.CharField(required=False, allow_null=True, default=None)
    scheme = serializers.ChoiceField(choices=[TERNARY, FIVE], default=TERNARY)
    classifiers = serializers.ListField(
        child=serializers.ChoiceField(choices=list(KINDS)), allow_empty=False, default=lambda: list(KINDS),
    )
    k_max = serializers.IntegerField(required=False, allow_null=True, min_value=2, default=None)
    expert_threshold = serializers.FloatField(required=False, allow_null=True, min_value=0, max_value=1, default=None)
    seed = serializers.IntegerField(required=False, allow_null=True, min_value=0, default=None)
    forest_grid = serializers.DictField(child=serializers.ListField(allow_empty=False), required=False, allow_null=True, default=None)
    svm_grid = serializers.DictField(child=serializers.ListField(allow_empty=False), required=False, allow_null=True, default=None)
    kmeans_restarts = serializers.IntegerField(required=False, allow_null=True, min_value=1, default=None)

    def validate_libraries(self, value):
        ids = [lib['id'] for lib in value]
        if len(ids) != len(set(ids)):
            raise serializers.ValidationError("library ids must be unique")
        return value

    def validate(self, data):
        if data.get('ground_truth') and data.get('seed') is None:
            raise serializers.ValidationError({'seed': "a seed is required when ground truth enables the learning stages"})
        return data

    def create(self, validated_data):
        libraries = LibrarySpecSerializer(many=True).create(validated_data['libraries'])
        ground_truth = validated_data.get('ground_truth')
        return PipelineConfig(
            libraries=libraries,
            repos=dict(validated_data['repos']),
            snapshot=validated_data['snapshot'].astimezone(timezone.utc),
            output=Path(validated_data['output']),
            identity=validated_data['identity'],
            ground_truth=Path(ground_truth) if ground_truth else None,
            scheme=validated_data['scheme'],
            classifiers=list(validated_data['classifiers']),
            k_max=validated_data.get('k_max'),
            expert_threshold=validated_data.get('expert_threshold'),
            seed=validated_data.get('seed'),
            forest_grid=validated_data.get('forest_grid'),
            svm_grid=validated_data.get('svm_grid'),
            kmeans_restarts=validated_data.get('kmeans_restarts'),
        )


def _resolve(base, value):
    if value is None:
        return None
    path = Path(value).expanduser()
    return str(path if path.is_absolute() else (base / path))


def build_config(document, base_dir=None, overrides=None):
    """
    Validate a configuration document

    Args:
        document: dict as read from YAML
        base_dir: directory relative paths are resolved against
        overrides: command-line values; None entries are ignored

    Raises:
        ConfigurationError: the document (with overrides) is invalid
    """
    document = dict(document or {})
    for key, value in (overrides or {}).items():
        if value is not None:
            document[key] = value

    if base_dir is not None:
        base = Path(base_dir)
        for key in ('output', 'ground_truth'):
            document[key] = _resolve(base, document.get(key))
        repos = dict(document.get('repos') or {})
        for key in ('path', 'clone_root'):
            if repos.get(key):
                repos[key] = _resolve(base, repos[key])
        document['repos'] = repos

    serializer = PipelineConfigSerializer(data=document)
    if not serializer.is_valid():
        raise ConfigurationError(f"Invalid pipeline configuration: {serializer.errors}")
    return serializer.save()


def load_config(path, overrides=None):
    """Read a YAML pipeline configuration; relative paths are relative to the file"""
    path = Path(path)
    try:
        with open(path) as f:
            document = yaml.safe_load(f) or {}
    except (OSError, yaml.YAMLError) as e:
        raise ConfigurationError(f"Cannot read configuration {path}: {e}") from e
    if not isinstance(document, dict):
        raise ConfigurationError(f"{path}: the configuration must be a mapping")
    logger.debug(f"Loaded configuration from {path}")
    return build_config(document, base_dir=path.parent, overrides=overrides)
