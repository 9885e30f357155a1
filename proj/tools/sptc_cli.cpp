// sptc: run backtest grids, generate synthetic markets, validate inputs.
//
// Exit status: 0 on success, 1 when grid points failed, 2 on bad input.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "sptc/errors.hpp"
#include "sptc/manifest.hpp"
#include "sptc/reports.hpp"
#include "sptc/synthetic_market.hpp"

namespace fs = std::filesystem;

namespace {

void add_generator_flags(CLI::App& cmd, sptc::SyntheticParams& p, std::string& start) {
    cmd.add_option("--seed", p.seed, "RNG seed")->capture_default_str();
    cmd.add_option("--stocks", p.n_stocks, "Number of stock slots")->capture_default_str();
    cmd.add_option("--days", p.n_days, "Number of trading dates")->capture_default_str();
    cmd.add_option("--start", start, "First date (YYYY-MM-DD)")->capture_default_str();
    cmd.add_option("--drift-min", p.drift_min)->capture_default_str();
    cmd.add_option("--drift-max", p.drift_max)->capture_default_str();
    cmd.add_option("--vol-min", p.vol_min)->capture_default_str();
    cmd.add_option("--vol-max", p.vol_max)->capture_default_str();
    cmd.add_option("--dividend-prob", p.dividend_prob, "Per stock-day dividend probability")
        ->capture_default_str();
    cmd.add_option("--yield-min", p.yield_min)->capture_default_str();
    cmd.add_option("--yield-max", p.yield_max)->capture_default_str();
    cmd.add_option("--delist-hazard", p.delist_hazard, "Per stock-day delisting probability")
        ->capture_default_str();
    cmd.add_option("--delist-return-min", p.delist_return_min)->capture_default_str();
    cmd.add_option("--delist-return-max", p.delist_return_max)->capture_default_str();
    cmd.add_option("--cap-min", p.cap_min)->capture_default_str();
    cmd.add_option("--cap-max", p.cap_max)->capture_default_str();
    cmd.add_flag("!--no-replace", p.replace_delisted, "Do not list a new stock when one delists");
}

int cmd_run(const fs::path& manifest_path, const std::optional<fs::path>& out_flag,
            std::optional<std::size_t> jobs_flag, const std::optional<fs::path>& market_flag,
            const std::optional<fs::path>& risk_free_flag, std::optional<std::uint64_t> seed_flag) {
    sptc::RunManifest m = sptc::load_manifest(manifest_path);
    if (market_flag) {
        m.market = *market_flag;
        m.synthetic.reset();
    }
    if (risk_free_flag) m.risk_free = *risk_free_flag;
    if (seed_flag) {
        if (!m.synthetic) throw sptc::ManifestError("--seed: manifest has no synthetic block");
        m.synthetic->seed = *seed_flag;
    }
    const fs::path out = out_flag ? *out_flag : m.out.value_or(fs::path("results"));
    const std::size_t jobs = jobs_flag.value_or(m.jobs);
    if (jobs == 0) throw sptc::InvalidInput("--jobs must be at least 1");

    const sptc::MarketDataset data = sptc::manifest_market(m);
    std::vector<sptc::RiskFreePoint> rf;
    if (m.risk_free) rf = sptc::load_risk_free_csv(*m.risk_free);

    const sptc::GridReport report = sptc::run_grid(m, data, rf, {out, jobs});
    fmt::print("{} grid points, {} benchmark-only runs, {} failures; results in {}\n",
               report.points.size(), report.benchmarks.size(), report.failures(), out.string());
    for (const auto& p : report.points) {
        if (!p.ok()) fmt::print(stderr, "FAILED {}: {}\n", p.key, p.error);
    }
    for (const auto& p : report.benchmarks) {
        if (!p.ok()) fmt::print(stderr, "FAILED {}: {}\n", p.key, p.error);
    }
    return report.exit_status();
}

int cmd_gen(sptc::SyntheticParams p, const std::string& start, const fs::path& out) {
    p.start = sptc::parse_date(start);
    const sptc::MarketDataset data = sptc::generate_market(p);
    sptc::write_file_atomic(out, sptc::to_market_csv(data));
    fmt::print("{}\n", sptc::dataset_digest(data));
    return 0;
}

int cmd_validate(const fs::path& path) {
    if (path.extension() == ".json") {
        const sptc::RunManifest m = sptc::load_manifest(path);
        fmt::print("manifest ok: {} grid points\n", m.grid.size());
        return 0;
    }
    std::ifstream in(path);
    std::string header;
    if (!in || !std::getline(in, header)) throw sptc::DataError(fmt::format("cannot read {}", path.string()));
    if (!header.empty() && header.back() == '\r') header.pop_back();
    if (header == "date,annual_yield") {
        const auto rf = sptc::load_risk_free_csv(path);
        fmt::print("risk-free ok: {} observations\n", rf.size());
        return 0;
    }
    const sptc::MarketDataset data = sptc::load_market_csv(path);
    fmt::print("market ok: {} dates, {} stocks, digest {}\n", data.num_days(), data.num_stocks(),
               sptc::dataset_digest(data));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Self-financing portfolio backtests with proportional transaction costs"};
    app.require_subcommand(1);

    fs::path manifest_path;
    std::optional<fs::path> out_flag, market_flag, risk_free_flag;
    std::optional<std::size_t> jobs_flag;
    std::optional<std::uint64_t> seed_flag;
    auto* run = app.add_subcommand("run", "Run every configuration of a manifest");
    run->add_option("manifest", manifest_path, "Manifest (JSON)")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_flag, "Output directory (overrides the manifest)");
    run->add_option("--jobs", jobs_flag, "Worker threads");
    run->add_option("--market", market_flag, "Market CSV (replaces the manifest's data source)");
    run->add_option("--risk-free", risk_free_flag, "Risk-free CSV");
    run->add_option("--seed", seed_flag, "Synthetic seed override");

    sptc::SyntheticParams gen_params;
    std::string gen_start = "1962-01-02";
    fs::path gen_out;
    auto* gen = app.add_subcommand("gen", "Write a synthetic market CSV and print its digest");
    add_generator_flags(*gen, gen_params, gen_start);
    gen->add_option("--out", gen_out, "Output CSV")->required();

    fs::path validate_path;
    auto* validate = app.add_subcommand("validate", "Check a manifest, market CSV or risk-free CSV");
    validate->add_option("file", validate_path)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return cmd_run(manifest_path, out_flag, jobs_flag, market_flag, risk_free_flag, seed_flag);
        if (*gen) return cmd_gen(gen_params, gen_start, gen_out);
        if (*validate) return cmd_validate(validate_path);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 2;
    }
    return 2;
}
