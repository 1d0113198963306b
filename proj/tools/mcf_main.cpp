#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcf/run.hpp"

namespace {

struct Job {
    std::filesystem::path config;
    std::filesystem::path out;
};

int execute(mcf::ExperimentKind kind, const std::vector<std::string>& configs, const std::string& out,
            int batch, std::optional<std::uint64_t> seed) {
    std::vector<Job> jobs;
    for (const auto& c : configs) {
        std::filesystem::path dir = out;
        if (configs.size() > 1) dir /= std::filesystem::path(c).stem();
        jobs.push_back({c, dir});
    }

    auto run_one = [&](const Job& job) {
        mcf::RunConfig cfg = mcf::parse_config([&] {
            std::ifstream in(job.config);
            if (!in) throw mcf::Error("cannot open config file: " + job.config.string());
            std::stringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }(), job.config.string());
        cfg.kind = kind;
        if (seed) cfg.seed = *seed;
        mcf::validate_config(cfg);
        return mcf::run(cfg, job.out, jobs.size() > 1 ? 1 : batch);
    };

    bool all = true;
    bool errored = false;
    const std::size_t width = static_cast<std::size_t>(std::max(1, batch));
    for (std::size_t begin = 0; begin < jobs.size(); begin += width) {
        const std::size_t end = std::min(jobs.size(), begin + width);
        std::vector<std::future<mcf::RunSummary>> running;
        for (std::size_t i = begin; i < end; ++i)
            running.push_back(std::async(width > 1 && jobs.size() > 1 ? std::launch::async : std::launch::deferred,
                                         run_one, jobs[i]));
        for (std::size_t i = begin; i < end; ++i) {
            try {
                const mcf::RunSummary s = running[i - begin].get();
                for (const auto& p : s.properties)
                    std::printf("%-28s %s  measured %.6g %s %.6g\n", p.name.c_str(), p.passed ? "pass" : "FAIL",
                                p.measured, p.relation.c_str(), p.tolerance);
                std::printf("%s: %s -> %s\n", jobs[i].config.string().c_str(),
                            s.all_passed() ? "all properties pass" : "some properties FAIL",
                            jobs[i].out.string().c_str());
                all = all && s.all_passed();
            } catch (const std::exception& e) {
                std::fprintf(stderr, "%s: error: %s\n", jobs[i].config.string().c_str(), e.what());
                errored = true;
            }
        }
    }
    if (errored) return 2;
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized level-set mean curvature flow: solver and estimate checks"};
    app.require_subcommand(1);

    std::vector<std::string> configs;
    std::string out = "out";
    int batch = 1;
    std::uint64_t seed_value = 0;

    for (const char* name : {"flow", "steady", "continuation", "barrier", "comparison", "viscosity", "liouville"}) {
        auto* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", configs, "configuration file(s)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out, "output directory")->capture_default_str();
        sub->add_option("--batch", batch, "concurrent runs")->check(CLI::PositiveNumber)->capture_default_str();
        sub->add_option("--seed", seed_value, "seed for randomized experiments");
    }

    CLI11_PARSE(app, argc, argv);

    const auto* sub = app.get_subcommands().front();
    std::optional<std::uint64_t> seed;
    if (sub->count("--seed")) seed = seed_value;
    try {
        return execute(mcf::parse_experiment_kind(sub->get_name()), configs, out, batch, seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
