from rest_framework import serializers

from gsee.conf import setting_default
from gsee.exceptions import ParameterError

from .operators import MAX_EXACT_NORM_SITES, MAX_SITES, Hamiltonian, PauliTerm


class HamiltonianSpecSerializer(serializers.Serializer):
    """Serializer for the hamiltonian section of an experiment config"""

    MODEL_CHOICES = [
        ('heisenberg', 'Fully connected random Heisenberg'),
        ('xxz', 'Nearest-neighbour XXZ chain'),
    ]

    model = serializers.ChoiceField(choices=MODEL_CHOICES)
    n = serializers.IntegerField(min_value=2, max_value=MAX_SITES)
    seed = serializers.IntegerField(min_value=0, required=False, allow_null=True, default=None)
    jx = serializers.FloatField(default=1.0)
    jz = serializers.FloatField(default=-1.0)
    periodic = serializers.BooleanField(default=True)
    margin = serializers.FloatField(min_value=0.0, default=setting_default('margin'))
    exact_norm = serializers.BooleanField(default=False)

    def validate(self, data):
        if data['model'] == 'heisenberg' and data.get('seed') is None:
            raise serializers.ValidationError({'seed': 'The Heisenberg model needs a coupling seed.'})
        if data['exact_norm'] and data['n'] > MAX_EXACT_NORM_SITES:
            raise serializers.ValidationError({
                'exact_norm': f'Exact spectral norm is available up to {MAX_EXACT_NORM_SITES} sites.'
            })
        return data


# ==================== TEXT FORMAT ====================

def dumps_hamiltonian(h):
    """Header 'n_sites tau norm_bound', then 'coefficient axes' per term"""
    lines = [f"{h.n_sites} {float(h.tau)!r} {float(h.norm_bound)!r}"]
    lines.extend(f"{float(term.coefficient)!r} {term.axes}" for term in h.terms)
    return '\n'.join(lines) + '\n'


def loads_hamiltonian(text):
    rows = [line.split() for line in text.splitlines() if line.strip() and not line.startswith('#')]
    if not rows or len(rows[0]) != 3:
        raise ParameterError("Hamiltonian text must start with 'n_sites tau norm_bound'")
    try:
        n_sites = int(rows[0][0])
        tau = float(rows[0][1])
        norm_bound = float(rows[0][2])
        terms = []
        for row in rows[1:]:
            if len(row) != 2:
                raise ParameterError(f"malformed term line: {' '.join(row)}")
            terms.append(PauliTerm(float(row[0]), row[1]))
    except ValueError as e:
        raise ParameterError(f"malformed Hamiltonian text: {str(e)}")
    return Hamiltonian(n_sites=n_sites, terms=tuple(terms), tau=tau, norm_bound=norm_bound)
