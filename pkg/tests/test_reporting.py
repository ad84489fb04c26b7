from eocsim import MemoryStore, Plan, RoundSummary, ScenarioConfig, run_eoc_round, run_round
from eocsim import reporting


def small_trace():
    return run_round(ScenarioConfig(population=200, initial_infected=3,
                                    duration_days=15), Plan.empty())


def test_trace_csv_round_trip(tmp_path):
    trace = small_trace()
    path = tmp_path / "trace.csv"
    reporting.write_trace_csv(trace, path)
    header = path.read_text().splitlines()[0]
    assert header == "day,S,E,I,II,R,IM,D"
    situations = reporting.read_trace_csv(path)
    assert [s.counts() for s in situations] == [s.counts() for s in trace.situations]


def test_round_log_file_round_trip(tmp_path):
    from eocsim import MemorySettings, SearchBudget
    config = ScenarioConfig(
        population=200, initial_infected=3, duration_days=8, checkpoint_day=0,
        planner=SearchBudget(generations=1, population_size=2),
        memory=MemorySettings(min_successfulness=0.0),
    )
    result = run_eoc_round(config, MemoryStore(min_successfulness=0.0))
    path = tmp_path / "round.log"
    reporting.write_round_log(result.log, path)
    assert reporting.read_round_log(path) == result.log


def sample_summaries():
    return [
        RoundSummary(0, 10, 0.608, 0.97, 29, 2821.447085676168, 0.0, 0, 0.001198),
        RoundSummary(1, 16, 0.55, 0.9, 25, 1934.25, 0.125, 1, 0.2),
        RoundSummary(2, 12, 0.31, 0.8, 18, 0.0, 0.0, None, None),
    ]


def test_summary_csv_round_trip(tmp_path):
    summaries = sample_summaries()
    path = tmp_path / "summary.csv"
    reporting.write_summary_csv(summaries, path)
    assert reporting.read_summary_csv(path) == summaries


def test_summary_csv_ordering(tmp_path):
    summaries = [RoundSummary(k, k, 0.1, 0.2, 1, 0.0) for k in range(10)]
    path = tmp_path / "summary.csv"
    reporting.write_summary_csv(summaries, path)
    assert [s.round_index for s in reporting.read_summary_csv(path)] == list(range(10))


def test_summary_table_shape():
    table = reporting.summary_table(sample_summaries())
    lines = table.splitlines()
    assert len(lines) == 2 + 3  # header, rule, one row per round
    assert "peak_day" in lines[0]
    assert "0.6080" in lines[2]


def test_figures_rendered(tmp_path):
    trace = small_trace()
    trace_png = tmp_path / "trace.png"
    summary_png = tmp_path / "summary.png"
    reporting.render_trace_figure(trace, trace_png, "Round 0")
    reporting.render_summary_figure(sample_summaries(), summary_png)
    assert trace_png.stat().st_size > 1000
    assert summary_png.stat().st_size > 1000
