import json
import os

import numpy as np
import pytest

from tdfc import config
from tdfc.cli import main

FAST = ['--steps-per-delay', '20']


def test_bundled_configs_round_trip():
    names = config.bundled_names()
    assert set(names) == {'double_scroll_origin', 'double_hook_delta6', 'double_scroll_P',
                          'double_scroll_P_tau029', 'rossler'}
    for n in names:
        c = config.load(n)
        assert config.parse(c.to_text()) == c
        for v, _ in c.variants:
            cv = c.with_variant(v)
            assert config.parse(cv.to_text()) == cv


def test_rossler_variants():
    c = config.load('rossler')
    assert c.tau == 0.25 and c.with_variant('tau_text').tau == 0.2
    with pytest.raises(config.ConfigError):
        c.with_variant('nope')


def test_config_errors_have_lines():
    text = '[experiment]\nsystem = chua\nequilibrium = 0\ntau = -1\n'
    with pytest.raises(config.ConfigError) as e:
        config.parse(text)
    assert e.value.line == 4
    with pytest.raises(config.ConfigError) as e:
        config.parse('[experiment]\nsystem = chua\nequilibrium = 0\ntau = 0.1\nbogus = 1\n')
    assert e.value.line == 5
    with pytest.raises(config.ConfigError) as e:
        config.parse('[experiment]\nsystem = chua\nequilibrium = 1 2 3\ntau = 0.1\n')
    assert e.value.line == 3
    with pytest.raises(config.ConfigError, match='targets'):
        config.parse('[experiment]\nsystem = chua\nequilibrium = 0\ntau = 0.1\n'
                     'targets = zeta=2\n')
    with pytest.raises(config.ConfigError, match='required'):
        config.parse('[experiment]\nsystem = chua\n')


def test_design_and_certify(tmp_path, capsys):
    out = str(tmp_path)
    assert main(['design', '--config', 'double_scroll_origin', '--out', out]) == 0
    text = capsys.readouterr().out
    assert '2.2407' in text and '61.0706' in text
    path = os.path.join(out, 'double_scroll_origin_design.json')
    assert main(['certify', '--design', path]) == 0
    assert 'certified: yes' in capsys.readouterr().out
    data = json.load(open(path))
    data['design']['K'][0][0] += 0.01
    bad = os.path.join(out, 'bad.json')
    json.dump(data, open(bad, 'w'))
    assert main(['certify', '--design', bad]) == 2


def test_certify_printed_override_fails(tmp_path):
    assert main(['certify', '--config', 'double_scroll_P_tau029']) == 2


def test_stable_equilibrium_zero_gain(tmp_path, capsys):
    cfg = tmp_path / 'stable.ini'
    cfg.write_text('[experiment]\nname = stable\nsystem = chua\npreset = double_scroll\n'
                   'params = alpha=1.0, beta=1.0, gamma=1.0, m0=1.0, m1=1.0\n'
                   'equilibrium = 0\ntau = 0.1\n')
    assert main(['design', '--config', str(cfg), '--out', str(tmp_path)]) == 0
    d = json.load(open(tmp_path / 'stable_design.json'))['design']
    assert np.all(np.array(d['K']) == 0)
    assert main(['certify', '--design', str(tmp_path / 'stable_design.json')]) == 0


def test_simulate_converges_and_is_reproducible(tmp_path):
    args = ['simulate', '--config', 'double_hook_delta6', '--horizon', '40'] + FAST
    a, b = tmp_path / 'a', tmp_path / 'b'
    assert main(args + ['--out', str(a)]) == 0
    assert main(args + ['--out', str(b)]) == 0
    ca = (a / 'double_hook_delta6.csv').read_bytes()
    assert ca == (b / 'double_hook_delta6.csv').read_bytes()
    assert ca.startswith(b't,x1,x2,x3,u1,u2,u3,active\n')
    rec = json.load(open(a / 'double_hook_delta6_metrics.json'))
    assert rec['converged'] is True


def test_simulate_divergent_case(tmp_path):
    rc = main(['simulate', '--config', 'double_scroll_P_tau029', '--out', str(tmp_path)] + FAST)
    assert rc == 2
    rec = json.load(open(tmp_path / 'double_scroll_P_tau029_metrics.json'))
    assert rec['diverged'] is True
    rows = (tmp_path / 'double_scroll_P_tau029.csv').read_text().splitlines()
    last = np.array(rows[-1].split(',')[1:4], dtype=float)
    assert np.all(np.isfinite(last)) and np.linalg.norm(last) > 1e6


def test_zero_horizon(tmp_path):
    rc = main(['simulate', '--config', 'rossler', '--horizon', '0', '--out', str(tmp_path)])
    assert rc == 2
    assert len((tmp_path / 'rossler.csv').read_text().splitlines()) == 2


def test_sweep(tmp_path, capsys):
    rc = main(['sweep', '--config', 'double_hook_delta6', '--horizon', '60', '--out',
               str(tmp_path)] + FAST)
    assert rc == 0
    rows = (tmp_path / 'double_hook_delta6_sweep.csv').read_text().splitlines()
    assert len(rows) == 3
    u6, u10 = (float(r.split(',')[3]) for r in rows[1:])
    assert u10 > u6


def test_usage_errors(tmp_path, capsys):
    assert main(['simulate']) == 1
    assert main(['design', '--config', 'no_such_config']) == 1
    assert main(['design', '--config', str(tmp_path / 'missing.ini')]) == 1
    assert main(['design', '--config', 'rossler', '--steps-per-delay', '3']) == 1
    with pytest.raises(SystemExit) as e:
        main(['frobnicate'])
    assert e.value.code == 1
    assert main(['--list']) == 0
