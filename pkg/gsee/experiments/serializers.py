from rest_framework import serializers

from acdf.serializers import SamplingSpecSerializer
from detect.search import CERTIFIED_SEARCH
from detect.serializers import DetectionSpecSerializer
from evolution.serializers import BackendSpecSerializer
from evolution.spectrum import MAX_EXACT_SITES
from fourier.serializers import FilterSpecSerializer
from hamiltonian.serializers import HamiltonianSpecSerializer
from resources.serializers import ResourceSpecSerializer
from states.serializers import StateSpecSerializer


class OutputSpecSerializer(serializers.Serializer):
    """Serializer for the output section of an experiment config"""

    dir = serializers.CharField(required=False, allow_blank=True, default='')
    spectrum = serializers.BooleanField(default=True)


SECTION_SERIALIZERS = {
    'hamiltonian': HamiltonianSpecSerializer,
    'state': StateSpecSerializer,
    'filter': FilterSpecSerializer,
    'sampling': SamplingSpecSerializer,
    'backend': BackendSpecSerializer,
    'detection': DetectionSpecSerializer,
    'resources': ResourceSpecSerializer,
    'output': OutputSpecSerializer,
}

# Sections a config may leave out entirely
OPTIONAL_SECTIONS = ('sampling', 'backend', 'detection', 'resources', 'output')


class ExperimentConfigSerializer(serializers.Serializer):
    """Whole experiment config, one nested serializer per section.

    Pass ``sections`` to validate only part of a config, as the single-stage
    commands do.
    """

    hamiltonian = HamiltonianSpecSerializer()
    state = StateSpecSerializer()
    filter = FilterSpecSerializer()
    sampling = SamplingSpecSerializer()
    backend = BackendSpecSerializer()
    detection = DetectionSpecSerializer()
    resources = ResourceSpecSerializer()
    output = OutputSpecSerializer()

    def __init__(self, *args, sections=None, **kwargs):
        super().__init__(*args, **kwargs)
        if sections is not None:
            for name in set(self.fields) - set(sections):
                self.fields.pop(name)

    def to_internal_value(self, data):
        if not isinstance(data, dict):
            raise serializers.ValidationError({'non_field_errors': ['Expected an object of config sections.']})
        # missing optional sections still get their field defaults
        data = {**{name: {} for name in OPTIONAL_SECTIONS if name in self.fields}, **data}
        unknown = set(data) - set(self.fields) - set(SECTION_SERIALIZERS)
        if unknown:
            raise serializers.ValidationError({name: ['Unknown config section.'] for name in sorted(unknown)})
        return super().to_internal_value({k: v for k, v in data.items() if k in self.fields})

    def validate(self, data):
        hamiltonian = data.get('hamiltonian')
        state = data.get('state')
        if hamiltonian and state and state['kind'] in ('overlaps', 'eigenstate'):
            if hamiltonian['n'] > MAX_EXACT_SITES:
                raise serializers.ValidationError({
                    'state': {'kind': [f"State kind '{state['kind']}' needs an eigendecomposition (n <= {MAX_EXACT_SITES})."]}
                })
        if hamiltonian and data.get('backend', {}).get('kind') == 'exact' and hamiltonian['n'] > MAX_EXACT_SITES:
            raise serializers.ValidationError({
                'backend': {'kind': [f"The exact backend is limited to {MAX_EXACT_SITES} sites."]}
            })
        detection = data.get('detection')
        filter_spec = data.get('filter')
        if detection and filter_spec and detection['method'] == CERTIFIED_SEARCH:
            eta = detection_eta(data)
            if eta <= 2.0 * filter_spec['epsilon']:
                raise serializers.ValidationError({
                    'detection': {'eta': [f"Eta={eta} must exceed 2 epsilon for the certified search."]}
                })
        return data


def detection_eta(config):
    """detection.eta, else resources.eta, else 4 epsilon"""
    for section in ('detection', 'resources'):
        eta = config.get(section, {}).get('eta')
        if eta is not None:
            return eta
    return 4.0 * config['filter']['epsilon']


def flatten_errors(errors, prefix=''):
    """Dotted-path messages from a nested DRF error dict"""
    messages = []
    if isinstance(errors, dict):
        for key, value in errors.items():
            path = prefix if key == 'non_field_errors' else (f"{prefix}.{key}" if prefix else str(key))
            messages.extend(flatten_errors(value, path))
    elif isinstance(errors, (list, tuple)):
        for value in errors:
            messages.extend(flatten_errors(value, prefix))
    else:
        messages.append(f"{prefix}: {errors}" if prefix else str(errors))
    return messages
