from edmtools.console import generate
from edmtools.console.generate import GeneratorKind, parse_weight
from edmtools.instances import read_instance
from edmtools.utils import InstanceError
import filecmp
import pytest


def test_generate_saxe(tmp_path, capsys):
    """Mimics the following command

    ```
    edmtools generate -K SAXE -w 0-1:1,1-2:1,0-2:2 -e 0.5 -o triangle.edm
    ```
    """
    outfile = tmp_path / "triangle.edm"
    generate.generate(
        kind=GeneratorKind.SAXE,
        outfile=outfile,
        weights=["0-1:1", "1-2:1", "0-2:2"],
        epsilon=0.5,
    )
    assert capsys.readouterr().out.strip() == str(outfile)
    instance = read_instance(outfile, redact=False)
    assert instance.n == 12
    assert instance.d == 2
    assert instance.metadata.weights == ((0, 1, 1), (1, 2, 1), (0, 2, 2))
    assert instance.metadata.points.shape == (12, 2)


def test_generate_masked_is_reproducible(request, tmp_path):
    outputs = [
        tmp_path / "{}.{}.edm".format(request.node.name, i) for i in range(2)
    ]
    for outfile in outputs:
        generate.generate(
            kind=GeneratorKind.MASKED, outfile=outfile, n=10, mask="chordal", seed=7
        )
    assert filecmp.cmp(outputs[0], outputs[1], shallow=False)
    instance = read_instance(outputs[0])
    assert instance.metadata.seed == 7
    assert instance.metadata.mask == ("chordal",)


@pytest.mark.parametrize(
    "settings",
    [
        pytest.param(dict(kind=GeneratorKind.SAXE), id="no_weights"),
        pytest.param(dict(kind=GeneratorKind.SAXE, weights=["0-1"]), id="bad_weight"),
        pytest.param(
            dict(kind=GeneratorKind.SAXE, weights=["0-1:9"]), id="weight_range"
        ),
        pytest.param(dict(kind=GeneratorKind.MASKED, mask="ring"), id="bad_mask"),
        pytest.param(
            dict(kind=GeneratorKind.MASKED, n=2, mask="cover", mask_param=3),
            id="infeasible_mask",
        ),
    ],
)
def test_generate_errors(settings, tmp_path):
    with pytest.raises(SystemExit) as err:
        generate.generate(outfile=tmp_path / "bad.edm", **settings)
    assert err.value.code == 3


def test_parse_weight():
    assert parse_weight("2-5:3") == (2, 5, 3)
    with pytest.raises(InstanceError):
        parse_weight("2:5-3")
