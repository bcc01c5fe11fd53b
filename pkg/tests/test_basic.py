"""Basic tests for the caci_bench package."""


def test_import():
    """Test that the module can be imported."""
    import caci_bench
    assert caci_bench.__version__ == '0.1.0'
    assert 'fig2-synthetic' in caci_bench.list_presets()


def test_run_experiment(tmp_path):
    """The one-call entry point writes results for a tiny config."""
    import caci_bench
    from conftest import small_config_dict

    config = caci_bench.config_from_dict(small_config_dict(trials=1))
    result = caci_bench.run_experiment(config, output_dir=str(tmp_path))
    assert set(result.frame['mechanism']) == {'baseline', 'caci', 'eps_first(0.3)'}
    assert (tmp_path / 'results.csv').exists()
