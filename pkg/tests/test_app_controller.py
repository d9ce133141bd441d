"""Tests for the AppController verification suite and the command line."""
import json
import pytest
from pathlib import Path
import sys

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from main import main
from src.app_controller import (
    FAIL,
    FINDING,
    PASS,
    SKIPPED,
    AppController,
    plane_orders,
)
from src.core.designs import (
    DesignValidationError,
    cyclic_design,
    decode,
    encode,
    projective_plane,
    save_design,
)
from src.utils.config_manager import NODE_BUDGET_ENV, ConfigManager


@pytest.fixture(autouse=True)
def no_budget_override(monkeypatch):
    monkeypatch.delenv(NODE_BUDGET_ENV, raising=False)


@pytest.fixture
def config(tmp_path):
    return ConfigManager(str(tmp_path / 'config.yaml'), create_if_missing=False)


@pytest.fixture
def config_arg(tmp_path):
    return ['--config', str(tmp_path / 'missing.yaml')]


@pytest.fixture
def corrupted_fano(tmp_path):
    lines = encode(cyclic_design(7, [[0, 1, 3]])).splitlines()
    lines[-1] = '0 2 5'
    path = tmp_path / 'broken.txt'
    path.write_text('\n'.join(lines) + '\n')
    return path


@pytest.fixture(scope='module')
def small_report():
    config = ConfigManager(str(Path(__file__).parent / 'no-such-config.yaml'),
                           create_if_missing=False)
    return AppController(config=config, node_budget=10 ** 9).verify_paper(max_q=2)


class TestPlaneOrders:
    """Test suite for plane_orders()."""

    def test_prime_powers_only(self):
        assert plane_orders(10) == [2, 3, 4, 5, 7, 8, 9]

    def test_empty(self):
        assert plane_orders(1) == []


class TestConstruct:
    """Test suite for AppController.construct()."""

    def test_kinds(self, config):
        controller = AppController(config=config)
        pg = controller.construct('pg', q=3)
        assert pg.params.as_tuple() == (13, 4, 1, 13, 4)
        assert controller.construct('ag', q=3).params.b == 12
        assert controller.construct('cyclic', v=11, bases=[[1, 3, 4, 5, 9]]).params.lam == 2
        assert controller.construct('complement', source=pg).params.k == 9
        assert controller.construct('residual', source=pg, block=2).params.v == 9
        assert controller.construct('dual', source=pg).params == pg.params

    def test_derived_kind_needs_source(self, config):
        with pytest.raises(ValueError):
            AppController(config=config).construct('dual')

    def test_overrides(self, config):
        controller = AppController(config=config, threads=3, node_budget=500)
        assert controller.threads == 3
        assert controller.node_budget == 500


class TestVerifySuite:
    """Test suite for AppController.verify_paper()."""

    def test_no_failures(self, small_report):
        assert small_report.failed() == []
        assert small_report.summary()[FAIL] == 0

    def test_findings_are_reported(self, small_report):
        findings = [c.name for c in small_report.all_checks() if c.status == FINDING]
        assert 'biplane_gamma_versus_k' in findings

    def test_catalogue(self, small_report):
        ids = [record.id for record in small_report.designs]
        assert ids == ['PG(2,2)', 'AG(2,2)', 'fano-cyclic', 'biplane-7', 'biplane-11',
                       'sts-13', 'sts-15']

    def test_plane_gammas(self, small_report):
        by_id = {record.id: record for record in small_report.designs}
        assert by_id['PG(2,2)'].gamma == 4
        assert by_id['AG(2,2)'].gamma == 3
        assert by_id['biplane-7'].gamma == 4

    def test_plane_checks_pass(self, small_report):
        pg = small_report.designs[0]
        statuses = {c.name: c.status for c in pg.checks}
        for name in ('gamma_projective_plane', 'general_lower_bound_tight',
                     'super_neat_enumeration', 'residual_relation', 'dual_invariance',
                     'oracle_equivalence', 'epn_certified_mds'):
            assert statuses[name] == PASS

    def test_global_checks(self, small_report):
        assert {c.name: c.status for c in small_report.checks} == {
            'biplane_sum_values': PASS,
            'plane_parameter_identities': PASS,
            'fano_constructions_agree': PASS,
            'residual_oracle_equivalence': PASS,
        }

    def test_json_schema(self, small_report):
        data = json.loads(small_report.to_json())
        assert set(data) == {'version', 'designs', 'checks', 'summary'}
        first = data['designs'][0]
        assert first['params'] == {'v': 7, 'k': 3, 'lambda': 1, 'b': 7, 'r': 3}
        assert first['gamma'] == 4
        assert first['neatness']['super_neat'] is True
        assert {'name', 'anchor', 'status', 'seconds'} <= set(first['checks'][0])
        assert sum(data['summary'].values()) == len(small_report.all_checks())

    def test_budget_exhaustion_skips(self, config):
        report = AppController(config=config, node_budget=1).verify_paper(max_q=4)
        assert report.failed() == []
        skipped = [c for c in report.all_checks() if c.status == SKIPPED]
        assert skipped
        pg4 = next(r for r in report.designs if r.id == 'PG(2,4)')
        assert pg4.gamma is None

    def test_extra_design(self, config, tmp_path):
        path = tmp_path / 'pg3.txt'
        save_design(projective_plane(3), path)
        report = AppController(config=config).verify_paper(max_q=2, extra_designs=[str(path)])
        assert report.designs[-1].id == 'pg3'
        assert report.designs[-1].gamma == 6
        assert report.failed() == []
        statuses = {c.name: c.status for c in report.designs[-1].checks}
        # not flagged block-transitive, still checked for gamma(residual) >= gamma - 1
        assert statuses['residual_relation'] == PASS
        assert statuses['dual_invariance'] == PASS

    def test_corrupted_extra_design(self, config, corrupted_fano):
        with pytest.raises(DesignValidationError) as exc_info:
            AppController(config=config).verify_paper(max_q=2, extra_designs=[str(corrupted_fano)])
        assert str(corrupted_fano) in str(exc_info.value)

    @pytest.mark.slow
    def test_runs_are_deterministic(self, config):
        def strip_times(data):
            for check in data['checks']:
                check.pop('seconds')
            for design in data['designs']:
                for check in design['checks']:
                    check.pop('seconds')
            return data

        first = AppController(config=config).verify_paper(max_q=3).to_dict()
        second = AppController(config=config).verify_paper(max_q=3).to_dict()
        assert strip_times(first) == strip_times(second)


class TestCommandLine:
    """Test suite for main()."""

    def test_construct_projective_plane(self, config_arg, tmp_path):
        out = tmp_path / 'pg2.txt'
        assert main(config_arg + ['construct', 'pg', '2', '--out', str(out)]) == 0
        assert out.read_text().splitlines()[0] == '7 3 1 7'

    def test_construct_cyclic_to_stdout(self, config_arg, capsys):
        assert main(config_arg + ['construct', 'cyclic', '11', '--base', '1,3,4,5,9']) == 0
        lines = capsys.readouterr().out.splitlines()
        assert '11 5 2 11' in lines

    def test_construct_stdout_is_a_design_file(self, config_arg, capsys):
        assert main(config_arg + ['construct', 'pg', '2']) == 0
        assert decode(capsys.readouterr().out) == projective_plane(2)

    def test_construct_invalid_base(self, config_arg, capsys):
        assert main(config_arg + ['construct', 'cyclic', '7', '--base', '0,1,2']) == 3
        assert 'error' in capsys.readouterr().err

    def test_construct_non_prime_power(self, config_arg):
        assert main(config_arg + ['construct', 'pg', '6']) == 3

    def test_construct_residual_needs_input(self, config_arg):
        assert main(config_arg + ['construct', 'residual']) == 2

    def test_construct_residual(self, config_arg, tmp_path):
        src = tmp_path / 'pg3.txt'
        out = tmp_path / 'ag3.txt'
        save_design(projective_plane(3), src)
        assert main(config_arg + ['construct', 'residual', '--input', str(src),
                                  '--block', '4', '--out', str(out)]) == 0
        assert out.read_text().splitlines()[0] == '9 3 1 12'

    def test_construct_residual_bad_block(self, config_arg, tmp_path, capsys):
        src = tmp_path / 'pg2.txt'
        save_design(projective_plane(2), src)
        assert main(config_arg + ['construct', 'residual', '--input', str(src),
                                  '--block', '99']) == 3
        assert 'Block index 99' in capsys.readouterr().err

    def test_gamma(self, config_arg, tmp_path, capsys):
        path = tmp_path / 'pg2.txt'
        save_design(projective_plane(2), path)
        assert main(config_arg + ['gamma', str(path), '--neat', '--enumerate', '--epn']) == 0
        out = capsys.readouterr().out
        assert 'gamma = 4' in out
        assert 'minimum dominating sets: 21' in out
        assert 'neat sets: 21/21' in out
        assert 'super-neat: true' in out

    def test_gamma_affine(self, config_arg, tmp_path, capsys):
        path = tmp_path / 'ag2.txt'
        assert main(config_arg + ['construct', 'ag', '2', '--out', str(path)]) == 0
        capsys.readouterr()
        assert main(config_arg + ['gamma', str(path)]) == 0
        assert 'gamma = 3' in capsys.readouterr().out

    def test_gamma_corrupted_file(self, config_arg, corrupted_fano):
        assert main(config_arg + ['gamma', str(corrupted_fano)]) == 3

    def test_gamma_missing_file(self, config_arg, tmp_path):
        assert main(config_arg + ['gamma', str(tmp_path / 'nothing.txt')]) == 3

    def test_gamma_budget_exhausted(self, config_arg, tmp_path, capsys):
        path = tmp_path / 'pg4.txt'
        save_design(projective_plane(4), path)
        assert main(config_arg + ['--node-budget', '1', 'gamma', str(path)]) == 4
        assert 'gamma <=' in capsys.readouterr().out

    def test_budget_from_environment(self, config_arg, tmp_path, monkeypatch):
        path = tmp_path / 'pg4.txt'
        save_design(projective_plane(4), path)
        monkeypatch.setenv(NODE_BUDGET_ENV, '1')
        assert main(config_arg + ['gamma', str(path)]) == 4

    def test_bounds_json(self, config_arg, tmp_path, capsys):
        path = tmp_path / 'pg2.txt'
        save_design(projective_plane(2), path)
        assert main(config_arg + ['bounds', str(path), '--json']) == 0
        data = json.loads(capsys.readouterr().out)
        assert data['gamma'] == 4
        assert data['params']['v'] == 7

    def test_verify_paper_json(self, config_arg, tmp_path, capsys):
        out = tmp_path / 'report.json'
        assert main(config_arg + ['verify-paper', '--max-q', '2', '--json', str(out)]) == 0
        data = json.loads(out.read_text())
        assert data['summary'][FAIL] == 0
        assert '[pass] PG(2,2) gamma_projective_plane' in capsys.readouterr().out

    def test_verify_paper_corrupted_design(self, config_arg, corrupted_fano, capsys):
        code = main(config_arg + ['verify-paper', '--max-q', '2', '--design', str(corrupted_fano)])
        assert code == 3
        assert str(corrupted_fano) in capsys.readouterr().err

    def test_unknown_command(self, config_arg):
        assert main(config_arg + ['frobnicate']) == 2

    def test_bad_thread_count(self, config_arg, tmp_path):
        path = tmp_path / 'pg2.txt'
        save_design(projective_plane(2), path)
        assert main(config_arg + ['--threads', '0', 'gamma', str(path)]) == 2
