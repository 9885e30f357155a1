#include "sptc/reports.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <fstream>
#include <map>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>

#include "sptc/errors.hpp"
#include "sptc/synthetic_market.hpp"

namespace sptc {

namespace {

std::string json_string(std::string_view s) {
    std::string out = "\"";
    for (char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    out += fmt::format("\\u{:04x}", static_cast<unsigned>(ch));
                } else {
                    out += ch;
                }
        }
    }
    return out + "\"";
}

std::string json_number(std::optional<double> v) {
    if (!v || !std::isfinite(*v)) return "null";
    return format_number(*v);
}

std::string csv_number(std::optional<double> v) { return v ? format_number(*v) : std::string{}; }

void parallel_for(std::size_t n, std::size_t jobs, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, n));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) fn(i);
        });
    }
}

BacktestConfig benchmark_of(const BacktestConfig& c) {
    BacktestConfig b;
    b.kind = PortfolioKind::index_tracking;
    b.d = c.d;
    b.trading = c.trading;
    b.renewing = c.renewing;
    b.rates = c.rates;
    b.initial_wealth = c.initial_wealth;
    b.diversity.delta = default_delta(c.trading);
    return b;
}

}  // namespace

std::string format_number(double x) { return fmt::format("{:.17g}", x); }

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
        out << content;
        out.flush();
        if (!out) throw std::runtime_error(fmt::format("write to {} failed", tmp.string()));
    }
    std::filesystem::rename(tmp, path);
}

std::string metrics_json(const std::string& key, const BacktestConfig& c, const Metrics& m) {
    std::string s = "{\n";
    s += fmt::format("  \"key\": {},\n", json_string(key));
    s += fmt::format("  \"portfolio\": {},\n", json_string(to_string(c.kind)));
    s += fmt::format("  \"d\": {},\n", c.d);
    s += fmt::format("  \"trading\": {},\n", json_string(to_string(c.trading)));
    s += fmt::format("  \"renewing\": {},\n", json_string(to_string(c.renewing)));
    s += fmt::format("  \"tc_buy\": {},\n", format_number(c.rates.tc_buy));
    s += fmt::format("  \"tc_sell\": {},\n", format_number(c.rates.tc_sell));
    s += fmt::format("  \"initial_wealth\": {},\n", format_number(c.initial_wealth));
    if (c.kind == PortfolioKind::diversity || c.kind == PortfolioKind::diversity_dynamic) {
        s += fmt::format("  \"p\": {},\n", format_number(c.diversity.p));
        s += fmt::format("  \"delta\": {},\n", c.diversity.delta);
    }
    if (c.kind == PortfolioKind::diversity) {
        s += fmt::format("  \"alpha\": {},\n", format_number(c.diversity.alpha));
    }
    if (c.kind == PortfolioKind::diversity_dynamic) {
        s += fmt::format("  \"alpha0\": {},\n", format_number(c.smoothing.alpha0));
        s += fmt::format("  \"beta\": {},\n", format_number(c.smoothing.beta));
        s += fmt::format("  \"xi\": {},\n", format_number(c.smoothing.xi));
    }
    s += fmt::format("  \"yearly_return\": {},\n", json_number(m.yearly_return));
    s += fmt::format("  \"excess_return\": {},\n", json_number(m.excess_return));
    s += fmt::format("  \"std\": {},\n", json_number(m.std_dev));
    s += fmt::format("  \"sharpe\": {},\n", json_number(m.sharpe));
    s += fmt::format("  \"terminal_wealth\": {},\n", format_number(m.terminal_wealth));
    s += fmt::format("  \"cumulative_tc\": {},\n", format_number(m.terminal_tc));
    s += fmt::format("  \"qv\": {},\n", json_number(m.qv));
    s += "  \"yearly_returns\": [";
    for (std::size_t i = 0; i < m.yearly.size(); ++i) {
        s += fmt::format("{}{{\"year\": {}, \"return\": {}}}", i ? ", " : "", m.yearly[i].year,
                         format_number(m.yearly[i].value));
    }
    s += "]\n}\n";
    return s;
}

std::string wealth_csv(const BacktestResult& r) {
    const bool dynamic = !r.alpha.empty();
    std::string s = dynamic ? "date,wealth,cumulative_tc,alpha\n" : "date,wealth,cumulative_tc\n";
    for (std::size_t i = 0; i < r.dates.size(); ++i) {
        s += format_date(r.dates[i]);
        s += ',';
        s += format_number(r.wealth[i]);
        s += ',';
        s += format_number(r.cumulative_tc[i]);
        if (dynamic) {
            s += ',';
            s += format_number(r.alpha[i]);
        }
        s += '\n';
    }
    return s;
}

std::string summary_csv(std::span<const PointOutcome> points) {
    std::string s = "metric";
    for (const auto& p : points) s += "," + p.key;
    s += '\n';
    using Getter = std::optional<double> (*)(const Metrics&);
    const std::pair<const char*, Getter> rows[] = {
        {"yearly_return", [](const Metrics& m) { return m.yearly_return; }},
        {"excess_return", [](const Metrics& m) { return m.excess_return; }},
        {"std", [](const Metrics& m) { return m.std_dev; }},
        {"sharpe", [](const Metrics& m) { return m.sharpe; }},
        {"terminal_wealth", [](const Metrics& m) { return std::optional<double>(m.terminal_wealth); }},
        {"cumulative_tc", [](const Metrics& m) { return std::optional<double>(m.terminal_tc); }},
        {"qv", [](const Metrics& m) { return m.qv; }},
    };
    for (const auto& [name, get] : rows) {
        s += name;
        for (const auto& p : points) {
            s += ',';
            if (p.metrics) s += csv_number(get(*p.metrics));
        }
        s += '\n';
    }
    return s;
}

std::string failures_json(std::span<const PointOutcome> points) {
    std::string s = "{\n  \"failures\": [";
    bool first = true;
    for (const auto& p : points) {
        if (p.ok()) continue;
        s += fmt::format("{}\n    {{\"key\": {}, \"error\": {}}}", first ? "" : ",", json_string(p.key),
                         json_string(p.error));
        first = false;
    }
    s += first ? "]\n}\n" : "\n  ]\n}\n";
    return s;
}

std::size_t GridReport::failures() const {
    std::size_t n = 0;
    for (const auto& p : points) n += p.ok() ? 0 : 1;
    for (const auto& p : benchmarks) n += p.ok() ? 0 : 1;
    return n;
}

MarketDataset manifest_market(const RunManifest& manifest) {
    if (manifest.synthetic) return generate_market(*manifest.synthetic);
    if (!manifest.market) throw InvalidInput("manifest names no market data");
    return load_market_csv(*manifest.market);
}

GridReport run_grid(const RunManifest& manifest, const MarketDataset& data,
                    std::span<const RiskFreePoint> risk_free, const RunOptions& options) {
    std::filesystem::create_directories(options.out);
    GridReport report;

    // Benchmarks first: the grid's own index-tracking points plus any the
    // other points need.
    struct Job {
        std::string key;
        BacktestConfig config;
        bool benchmark_only;
    };
    std::vector<Job> bench_jobs;
    std::map<std::string, std::size_t> bench_index;
    for (const auto& g : manifest.grid) {
        if (g.config.kind == PortfolioKind::index_tracking && !bench_index.count(g.key)) {
            bench_index[g.key] = bench_jobs.size();
            bench_jobs.push_back({g.key, g.config, false});
        }
    }
    for (const auto& g : manifest.grid) {
        const BacktestConfig b = benchmark_of(g.config);
        const std::string key = config_key(b);
        if (!bench_index.count(key)) {
            bench_index[key] = bench_jobs.size();
            bench_jobs.push_back({key, b, true});
        }
    }

    auto point_dir = [&](const Job& job) {
        return job.benchmark_only ? options.out / "benchmarks" / job.key : options.out / job.key;
    };

    std::vector<std::optional<BacktestResult>> bench_results(bench_jobs.size());
    std::vector<PointOutcome> bench_outcomes(bench_jobs.size());
    parallel_for(bench_jobs.size(), options.jobs, [&](std::size_t i) {
        const Job& job = bench_jobs[i];
        PointOutcome& out = bench_outcomes[i];
        out.key = job.key;
        out.config = job.config;
        try {
            BacktestResult r = run_backtest(job.config, data);
            Metrics m = summarize(r, risk_free, &r);
            const auto dir = point_dir(job);
            write_file_atomic(dir / "wealth.csv", wealth_csv(r));
            write_file_atomic(dir / "metrics.json", metrics_json(job.key, job.config, m));
            r.trades.clear();
            r.baseline_trades.clear();
            bench_results[i] = std::move(r);
            out.metrics = std::move(m);
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    });

    std::vector<std::size_t> others;
    for (std::size_t i = 0; i < manifest.grid.size(); ++i) {
        if (manifest.grid[i].config.kind != PortfolioKind::index_tracking) others.push_back(i);
    }
    std::vector<PointOutcome> other_outcomes(others.size());
    parallel_for(others.size(), options.jobs, [&](std::size_t k) {
        const GridPoint& g = manifest.grid[others[k]];
        PointOutcome& out = other_outcomes[k];
        out.key = g.key;
        out.config = g.config;
        try {
            const BacktestResult r = run_backtest(g.config, data);
            const auto& bench = bench_results[bench_index.at(config_key(benchmark_of(g.config)))];
            Metrics m = summarize(r, risk_free, bench ? &*bench : nullptr);
            const Job job{g.key, g.config, false};
            write_file_atomic(point_dir(job) / "wealth.csv", wealth_csv(r));
            write_file_atomic(point_dir(job) / "metrics.json", metrics_json(g.key, g.config, m));
            out.metrics = std::move(m);
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    });

    std::size_t other_pos = 0;
    for (const auto& g : manifest.grid) {
        if (g.config.kind == PortfolioKind::index_tracking) {
            report.points.push_back(bench_outcomes[bench_index.at(g.key)]);
        } else {
            report.points.push_back(std::move(other_outcomes[other_pos++]));
        }
    }
    for (std::size_t i = 0; i < bench_jobs.size(); ++i) {
        if (bench_jobs[i].benchmark_only) report.benchmarks.push_back(bench_outcomes[i]);
    }

    // One capitalization index per (d, renewing) pair.
    std::set<std::pair<std::size_t, RenewingFrequency>> index_keys;
    for (const auto& g : manifest.grid) index_keys.insert({g.config.d, g.config.renewing});
    for (const auto& [d, renewing] : index_keys) {
        const std::string name = fmt::format("d{}_{}", d, to_string(renewing));
        try {
            const Calendar cal = build_calendar(data.dates(), TradingFrequency::daily, renewing);
            const auto level = capitalization_index(data, d, cal.renewal_days, 1.0);
            std::string s = "date,level\n";
            for (std::size_t i = 0; i < level.size(); ++i) {
                s += format_date(data.dates()[i]) + "," + format_number(level[i]) + "\n";
            }
            write_file_atomic(options.out / "cap_index" / (name + ".csv"), s);
        } catch (const std::exception& e) {
            PointOutcome failed;
            failed.key = "cap_index_" + name;
            failed.error = e.what();
            report.benchmarks.push_back(std::move(failed));
        }
    }

    write_file_atomic(options.out / "summary.csv", summary_csv(report.points));
    std::vector<PointOutcome> all = report.points;
    all.insert(all.end(), report.benchmarks.begin(), report.benchmarks.end());
    write_file_atomic(options.out / "failures.json", failures_json(all));
    return report;
}

}  // namespace sptc
