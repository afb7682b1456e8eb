import json

import pytest

from segmentkit import documents
from segmentkit.cli import (
    EXIT_ARGUMENT,
    EXIT_MISMATCH,
    EXIT_OK,
    EXIT_RESOURCE,
    EXIT_VERDICT,
    RunConfig,
    main,
    parse_partition,
    read_samples,
)
from segmentkit.errors import ArgumentError, StructuralError
from segmentkit.grid import Grid
from segmentkit.partitions import GridPartition, Partition


@pytest.fixture
def samples_file(tmp_path):
    path = tmp_path / "signal.csv"
    path.write_text("value\n0.0\n0.0\n1.0\n1.0\n")
    return str(path)


@pytest.fixture
def piecewise_file(tmp_path):
    path = tmp_path / "signal.json"
    path.write_text(json.dumps({'format': 1, 'pieces': [[0.0, 0.4, 0.2, 0.5], [0.4, 0.75, 1.0, -0.3],
                                                        [0.75, 1.0, 0.1]]}))
    return str(path)


def run(tmp_path, name, *argv):
    output = str(tmp_path / name)
    return main([*argv, '--output', output]), output


def test_segment_samples(tmp_path, samples_file):
    code, output = run(tmp_path, "result.json", 'segment', '--input', samples_file, '--gamma', '0.1', '--mu', '0')
    assert code == EXIT_OK
    doc = documents.load_result(output)
    payload = doc['payload']
    assert payload['partition'] == {'indices': [0, 2, 4], 'points': [0.0, 0.5, 1.0]}
    assert payload['objective']['total'] == pytest.approx(0.1)
    assert payload['parameters']['n'] == 4
    assert 'runtime_seconds' not in payload['diagnostics']
    assert doc['header']['runtime_seconds'] >= 0


def test_segment_writes_to_stdout(capsys, samples_file):
    assert main(['segment', '--input', samples_file, '--gamma', '0.1']) == EXIT_OK
    assert json.loads(capsys.readouterr().out)['payload']['command'] == 'segment'


def test_identical_runs_give_identical_payloads(tmp_path, piecewise_file):
    argv = ('segment', '--input', piecewise_file, '--gamma', '0.05', '--mu', '2', '--nref', '16', '--modes', '32')
    first_code, first = run(tmp_path, "first.json", *argv)
    second_code, second = run(tmp_path, "second.json", *argv)
    assert first_code == second_code == EXIT_OK
    assert documents.payload_bytes(documents.load_result(first)) == \
        documents.payload_bytes(documents.load_result(second))


@pytest.mark.parametrize("argv", [
    ('--gamma', '0.1', '--mu', '1'),
    ('--gamma', '0.1', '--mu', '0', '--n', '8'),
    ('--gamma', '0.05', '--mu', '2', '--nref', '16', '--modes', '32'),
    ('--gamma', '0.05', '--mu', '0', '--t', '0', '--nref', '16'),
])
def test_stored_objective_can_be_recomputed(tmp_path, piecewise_file, samples_file, argv):
    source = samples_file if '--n' not in argv and '--nref' not in argv else piecewise_file
    code, output = run(tmp_path, "result.json", 'segment', '--input', source, *argv)
    assert code == EXIT_OK
    doc = documents.load_result(output)
    recomputed = documents.reevaluate(doc)
    assert recomputed.total == pytest.approx(doc['payload']['objective']['total'], rel=1e-10, abs=1e-12)


def test_sample_inputs_are_coarsened_to_the_requested_grid(tmp_path):
    path = tmp_path / "fine.csv"
    path.write_text("\n".join(["0.0"] * 4 + ["2.0", "0.0"] + ["1.0"] * 2) + "\n")
    code, output = run(tmp_path, "result.json", 'segment', '--input', str(path), '--gamma', '0.1', '--n', '4')
    assert code == EXIT_OK
    payload = documents.load_result(output)['payload']
    assert payload['solution']['values'] == [0.0, 0.0, 1.0, 1.0]
    assert payload['input']['n'] == 8


def test_solve_partition(tmp_path):
    path = tmp_path / "four.csv"
    path.write_text("0\n0.5\n1\n2\n")
    code, output = run(tmp_path, "result.json", 'solve-partition', '--input', str(path), '--mu', '0',
                       '--partition', '0,2,4')
    assert code == EXIT_OK
    payload = documents.load_result(output)['payload']
    assert payload['solution']['values'] == [0.25, 0.25, 1.5, 1.5]
    assert payload['diagnostics']['fixed_partition_objective'] == pytest.approx((0.0625 + 0.0625 + 0.25 + 0.25) / 4)


def test_solve_partition_on_a_piecewise_input(tmp_path, piecewise_file):
    code, output = run(tmp_path, "result.json", 'solve-partition', '--input', piecewise_file, '--mu', '1',
                       '--partition', '0,0.4,1', '--modes', '32')
    assert code == EXIT_OK
    payload = documents.load_result(output)['payload']
    assert payload['solution']['kind'] == 'cosine'
    assert payload['partition'] == {'indices': None, 'points': [0.0, 0.4, 1.0]}


def test_malformed_sample_file(tmp_path):
    path = tmp_path / "broken.csv"
    path.write_text("1.0\n2.0\nthree\n")
    with pytest.raises(StructuralError, match="broken.csv:3"):
        read_samples(str(path))
    assert main(['segment', '--input', str(path), '--gamma', '0.1']) == EXIT_ARGUMENT


@pytest.mark.parametrize("argv", [
    ('segment', '--gamma', '0.1'),
    ('segment', '--gamma', '-1', '--input', 'x.csv'),
    ('segment', '--gamma', '0.1', '--n', '8', '--t', '0.25', '--input', 'x.csv'),
    ('segment', '--input', 'missing.csv', '--gamma', '0.1'),
    ('oracle', '--n', '20'),
    ('sweep', '--trajectory', 'no-such-trajectory'),
    ('solve-partition', '--mu', '1'),
])
def test_argument_errors_exit_with_2(tmp_path, argv):
    assert main([*argv, '--output', str(tmp_path / "out.json")]) == EXIT_ARGUMENT


@pytest.mark.parametrize("model, mu", [('bz', '0'), ('potts', '1'), ('ms', '1')])
def test_model_must_match_parameters(tmp_path, samples_file, model, mu):
    code, _ = run(tmp_path, "out.json", 'segment', '--input', samples_file, '--gamma', '0.1', '--mu', mu,
                  '--model', model)
    assert code == EXIT_ARGUMENT


def test_size_cap_exits_with_3(tmp_path, samples_file):
    code, _ = run(tmp_path, "out.json", 'segment', '--input', samples_file, '--gamma', '0.1', '--mu', '1',
                  '--cap', '2')
    assert code == EXIT_RESOURCE


def test_oracle_bundled_suite_agrees(tmp_path):
    code, output = run(tmp_path, "oracle.json", 'oracle')
    assert code == EXIT_OK
    payload = documents.load_result(output)['payload']
    assert payload['instances'] == payload['agreed'] == 200
    assert payload['mismatches'] == []


def test_oracle_on_a_sample_file(tmp_path, samples_file):
    code, output = run(tmp_path, "oracle.json", 'oracle', '--input', samples_file, '--gamma', '0.1', '--mu', '0.5')
    assert code == EXIT_OK
    assert documents.load_result(output)['payload']['instances'] == 1


def test_oracle_mismatch_exits_with_5(tmp_path, monkeypatch):
    from segmentkit.optimize import brute_force_min as original

    def shifted(g, gamma, mu):
        result = original(g, gamma, mu)
        result.objective = type(result.objective)(0.0, 0.0, 0.0, result.objective.total + 1.0)
        return result

    monkeypatch.setattr('segmentkit.optimize.brute_force_min', shifted)
    code, output = run(tmp_path, "oracle.json", 'oracle', '--instances', '3')
    assert code == EXIT_MISMATCH
    assert len(documents.load_result(output)['payload']['mismatches']) == 3


def test_sweep_exit_codes(tmp_path):
    code, output = run(tmp_path, "sweep.json", 'sweep', '--trajectory', 't')
    assert code == EXIT_OK
    report = documents.load_result(output)['payload']['report']
    assert report['verdict']['passed']

    code, _ = run(tmp_path, "solver.json", 'sweep', '--trajectory', 'solver', '--tolerance', '1e-6')
    assert code == EXIT_VERDICT


def test_sweep_from_a_trajectory_file(tmp_path):
    path = tmp_path / "trajectory.json"
    path.write_text(json.dumps({
        'signal': {'pieces': [[0.0, 0.5, 0.0], [0.5, 1.0, 1.0]]},
        'steps': [[0.1, 0.0, 2], [0.1, 0.0, 4], [0.1, 0.0, 8], [0.1, 0.0, 16]],
        'limit': [0.1, 0.0, 0],
    }))
    code, _ = run(tmp_path, "sweep.json", 'sweep', '--trajectory', str(path), '--nref', '16')
    assert code == EXIT_OK


def test_report_writes_a_trace(tmp_path, samples_file):
    _, output = run(tmp_path, "result.json", 'segment', '--input', samples_file, '--gamma', '0.1')
    assert main(['report', '--input', output]) == EXIT_OK
    lines = (tmp_path / "result.trace.tsv").read_text().splitlines()
    assert lines[0] == "x\tvalue"
    assert len(lines) == 1 + 2 * 4
    assert lines[-1] == "1.0\t1.0"


def test_report_writes_a_sweep_curve(tmp_path):
    _, output = run(tmp_path, "solver.json", 'sweep', '--trajectory', 'solver')
    assert main(['report', '--input', output, '--output', str(tmp_path / "curve")]) == EXIT_OK
    lines = (tmp_path / "curve.curve.tsv").read_text().splitlines()
    assert lines[0] == "n\tdistance"
    assert [line.split("\t")[0] for line in lines[1:]] == [str(8 * 2 ** k) for k in range(8)]


def test_report_rejects_other_documents(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({'format': 2, 'payload': {}}))
    assert main(['report', '--input', str(path)]) == EXIT_ARGUMENT


def test_parse_partition():
    assert parse_partition("0,2,4", 4) == GridPartition(Grid(4), (0, 2, 4))
    assert parse_partition("0, 0.5, 1", 4).indices == (0, 2, 4)
    assert parse_partition("0,0.25,1", None) == Partition((0.0, 0.25, 1.0))
    with pytest.raises(ArgumentError):
        parse_partition("0,a,1", None)
    with pytest.raises(ArgumentError):
        parse_partition("0,0.3,1", 4)


def test_run_config_grid_size():
    assert RunConfig('segment', t=0.125).grid_size == 8
    assert RunConfig('segment', t=0.0).grid_size is None
    with pytest.raises(ArgumentError):
        RunConfig('segment', t=0.3).grid_size
    with pytest.raises(ArgumentError):
        RunConfig('segment', n=0)
    assert RunConfig('segment', n=4, t=0.25).grid_size == 4


def test_settings_come_from_the_storage_directory(tmp_path, samples_file):
    storage = tmp_path / "elsewhere"
    storage.mkdir()
    (storage / "settings.json").write_text(json.dumps({'optimize.cap.bz': 2}))
    code = main(['segment', '--input', samples_file, '--gamma', '0.1', '--mu', '1',
                 '--persistent-storage-dir', str(storage), '--output', str(tmp_path / "out.json")])
    assert code == EXIT_RESOURCE


def test_report_curve_of_a_trajectory_is_keyed_by_grid_size(tmp_path):
    _, output = run(tmp_path, "t.json", 'sweep', '--trajectory', 't')
    assert main(['report', '--input', output]) == EXIT_OK
    lines = (tmp_path / "t.curve.tsv").read_text().splitlines()
    assert [line.split("\t")[0] for line in lines[1:]] == [str(2 ** s) for s in range(1, 11)]


def test_report_of_a_missing_document_exits_with_2(tmp_path):
    assert main(['report', '--input', str(tmp_path / "missing.json")]) == EXIT_ARGUMENT


@pytest.mark.parametrize("content", [
    "[1, 2]",
    json.dumps({'pieces': [[0, 1, 'x']]}),
    json.dumps({'pieces': 3}),
    "{\"pieces\": ",
])
def test_malformed_signal_documents_exit_with_2(tmp_path, content):
    path = tmp_path / "signal.json"
    path.write_text(content)
    assert main(['segment', '--input', str(path), '--gamma', '0.1', '--nref', '8']) == EXIT_ARGUMENT
    assert main(['report', '--input', str(path)]) == EXIT_ARGUMENT


def test_report_of_an_incomplete_sweep_exits_with_2(tmp_path):
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps({'format': 1, 'header': {}, 'payload': {'command': 'sweep'}}))
    assert main(['report', '--input', str(path)]) == EXIT_ARGUMENT
