import json

import numpy as np
import pandas as pd
from rest_framework import serializers

from preprocess.exceptions import PreprocessError
from preprocess.records import TransformLog
from .exceptions import ClusteringError
from .selection import LIKELY_EXPERT, UNKNOWN, ClusterModel

VERDICT_COLUMNS = ['developer', 'library', 'verdict', 'distance_margin']


class ClusterEntrySerializer(serializers.Serializer):
    label = serializers.RegexField(r'^C\d+$')
    index = serializers.IntegerField(min_value=0)
    members = serializers.IntegerField(min_value=0)
    labelled = serializers.IntegerField(min_value=0)
    novice = serializers.FloatField(min_value=0, max_value=1)
    intermediate = serializers.FloatField(min_value=0, max_value=1)
    expert = serializers.FloatField(min_value=0, max_value=1)
    centroid = serializers.ListField(child=serializers.FloatField(), allow_empty=False)


class SelectionStepSerializer(serializers.Serializer):
    k = serializers.IntegerField(min_value=2)
    best_expert_fraction = serializers.FloatField(min_value=0, max_value=1)


class ClusterModelSerializer(serializers.Serializer):
    """Serializer for clusters.json; clusters are listed by expert fraction as C1..Ck"""

    library = serializers.CharField(allow_blank=True)
    k = serializers.IntegerField(min_value=1)
    expert_cluster = serializers.IntegerField(min_value=0)
    threshold_used = serializers.FloatField(min_value=0, max_value=1)
    below_threshold = serializers.BooleanField()
    inertia = serializers.FloatField(min_value=0)
    columns = serializers.ListField(child=serializers.CharField())
    clusters = ClusterEntrySerializer(many=True)
    selection_trace = SelectionStepSerializer(many=True)
    assignment = serializers.DictField(child=serializers.IntegerField(min_value=0))
    transform_log = serializers.DictField(required=False, allow_null=True)

    def validate(self, data):
        indexes = sorted(entry['index'] for entry in data['clusters'])
        if indexes != list(range(data['k'])):
            raise serializers.ValidationError("clusters must list every index 0..k-1 once")
        if data['expert_cluster'] >= data['k']:
            raise serializers.ValidationError("expert_cluster out of range")
        if any(len(entry['centroid']) != len(data['columns']) for entry in data['clusters']):
            raise serializers.ValidationError("centroid length does not match columns")
        return data

    def create(self, validated_data):
        entries = sorted(validated_data['clusters'], key=lambda entry: entry['index'])
        log = validated_data.get('transform_log')
        try:
            transform_log = TransformLog.from_dict(log) if log else None
        except PreprocessError as e:
            raise ClusteringError(str(e)) from e
        return ClusterModel(
            k=validated_data['k'],
            centroids=np.array([entry['centroid'] for entry in entries], dtype=float),
            assignment=dict(validated_data['assignment']),
            composition=[
                {key: entry[key] for key in ('members', 'labelled', 'novice', 'intermediate', 'expert')}
                | {'cluster': entry['index']}
                for entry in entries
            ],
            expert_cluster=validated_data['expert_cluster'],
            threshold_used=validated_data['threshold_used'],
            inertia=validated_data['inertia'],
            below_threshold=validated_data['below_threshold'],
            selection_trace=list(validated_data['selection_trace']),
            transform_log=transform_log,
        )


def model_document(model, library='', columns=()):
    clusters = []
    for rank, index in enumerate(model.ranked(), start=1):
        entry = model.composition[index]
        clusters.append({
            'label': f"C{rank}",
            'index': index,
            'members': entry['members'],
            'labelled': entry['labelled'],
            'novice': entry['novice'],
            'intermediate': entry['intermediate'],
            'expert': entry['expert'],
            'centroid': [float(x) for x in model.centroids[index]],
        })
    return {
        'library': library,
        'k': model.k,
        'expert_cluster': model.expert_cluster,
        'threshold_used': model.threshold_used,
        'below_threshold': model.below_threshold,
        'inertia': model.inertia,
        'columns': list(columns or (model.transform_log.active if model.transform_log else [])),
        'clusters': clusters,
        'selection_trace': model.selection_trace,
        'assignment': dict(sorted(model.assignment.items())),
        'transform_log': model.transform_log.to_dict() if model.transform_log else None,
    }


def dump_model(model, path, library='', columns=()):
    with open(path, 'w') as f:
        json.dump(model_document(model, library, columns), f, indent=2, sort_keys=True)
        f.write('\n')


def load_model(path):
    """Load clusters.json into a ClusterModel"""
    try:
        with open(path) as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ClusteringError(f"Cannot read cluster model {path}: {e}") from e

    serializer = ClusterModelSerializer(data=data)
    if not serializer.is_valid():
        raise ClusteringError(f"Invalid cluster model {path}: {serializer.errors}")
    return serializer.save()


def write_verdicts(rows, path):
    frame = pd.DataFrame(rows, columns=VERDICT_COLUMNS)
    frame.to_csv(path, index=False, float_format='%.17g', lineterminator='\n')


def read_verdicts(path):
    frame = pd.read_csv(path, dtype={'developer': str, 'library': str, 'verdict': str},
                        keep_default_na=False, float_precision='round_trip')
    if list(frame.columns) != VERDICT_COLUMNS:
        raise ClusteringError(f"{path}: expected columns {','.join(VERDICT_COLUMNS)}")
    if not frame['verdict'].isin([LIKELY_EXPERT, UNKNOWN]).all():
        raise ClusteringError(f"{path}: unknown verdict values")
    return frame.to_dict('records')


def write_intersection(developers, path):
    """experts.intersection.csv: one developer per row, sorted"""
    frame = pd.DataFrame({'developer': sorted(developers)}, columns=['developer'], dtype=str)
    frame.to_csv(path, index=False, lineterminator='\n')
