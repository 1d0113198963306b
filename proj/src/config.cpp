#include "mcf/config.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace mcf {

namespace {

constexpr std::pair<ExperimentKind, const char*> kKinds[] = {
    {ExperimentKind::Flow, "flow"},
    {ExperimentKind::Steady, "steady"},
    {ExperimentKind::Continuation, "continuation"},
    {ExperimentKind::Barrier, "barrier"},
    {ExperimentKind::Comparison, "comparison"},
    {ExperimentKind::Viscosity, "viscosity"},
    {ExperimentKind::Liouville, "liouville"},
};

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

class Context {
public:
    Context(const std::string& origin, int line, const std::string& key)
        : origin_(origin), line_(line), key_(key) {}

    [[noreturn]] void fail(const std::string& what) const {
        std::ostringstream os;
        os << origin_ << ":" << line_ << ": " << key_ << ": " << what;
        throw Error(os.str());
    }

    double number(const std::string& v) const {
        std::size_t used = 0;
        double x = 0.0;
        try {
            x = std::stod(v, &used);
        } catch (const std::exception&) {
            fail("expected a number, got '" + v + "'");
        }
        if (used != v.size()) fail("expected a number, got '" + v + "'");
        return x;
    }

    std::int64_t integer(const std::string& v) const {
        const double x = number(v);
        if (x != std::floor(x) || std::abs(x) > 9e15) fail("expected an integer, got '" + v + "'");
        return static_cast<std::int64_t>(x);
    }

    std::vector<double> list(const std::string& v) const {
        std::vector<double> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(number(item));
        }
        return out;
    }

    Expression expression(const std::string& v) const {
        try {
            return Expression::parse(v);
        } catch (const Error& e) {
            fail(e.what());
        }
    }

private:
    const std::string& origin_;
    int line_;
    const std::string& key_;
};

}  // namespace

const char* to_string(ExperimentKind kind) {
    for (const auto& [k, name] : kKinds)
        if (k == kind) return name;
    return "unknown";
}

ExperimentKind parse_experiment_kind(const std::string& name) {
    for (const auto& [k, n] : kKinds)
        if (name == n) return k;
    throw Error("unknown experiment kind '" + name + "'");
}

IBVP RunConfig::problem() const {
    const Expression hh = h, gg = g;
    return IBVP{domain, [hh](const Point& x) { return hh(x); }, [gg](const Point& x) { return gg(x); }};
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    RunConfig c;
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            std::ostringstream os;
            os << origin << ":" << line_no << ": expected 'key = value'";
            throw Error(os.str());
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const Context ctx(origin, line_no, key);
        if (value.empty()) ctx.fail("missing value");

        if (key == "experiment") {
            try {
                c.kind = parse_experiment_kind(value);
            } catch (const Error& e) {
                ctx.fail(e.what());
            }
        } else if (key == "domain.kind") {
            if (value == "ball") c.domain.kind = DomainKind::Ball;
            else if (value == "ellipse") c.domain.kind = DomainKind::Ellipse;
            else if (value == "stadium") c.domain.kind = DomainKind::Stadium;
            else ctx.fail("expected ball, ellipse or stadium");
        } else if (key == "domain.dim") {
            c.domain.dim = static_cast<int>(ctx.integer(value));
        } else if (key == "domain.center") {
            const auto v = ctx.list(value);
            if (v.empty() || v.size() > 3) ctx.fail("expected 1 to 3 coordinates");
            c.domain.center = {0.0, 0.0, 0.0};
            for (std::size_t i = 0; i < v.size(); ++i) c.domain.center[i] = v[i];
        } else if (key == "domain.radius") {
            c.domain.radius = ctx.number(value);
        } else if (key == "domain.a") {
            c.domain.semi_a = ctx.number(value);
        } else if (key == "domain.b") {
            c.domain.semi_b = ctx.number(value);
        } else if (key == "domain.half_width") {
            c.domain.half_width = ctx.number(value);
        } else if (key == "domain.straight_half_length") {
            c.domain.straight_half_length = ctx.number(value);
        } else if (key == "domain.corner_radius") {
            c.domain.corner_radius = ctx.number(value);
        } else if (key == "data.h") {
            c.h = ctx.expression(value);
        } else if (key == "data.g") {
            c.g = ctx.expression(value);
        } else if (key == "params.epsilon") {
            c.params.epsilon = ctx.number(value);
        } else if (key == "params.nu") {
            c.params.nu = ctx.number(value);
        } else if (key == "params.sigma") {
            c.params.sigma = ctx.number(value);
        } else if (key == "params.cfl_factor") {
            c.params.cfl_factor = ctx.number(value);
        } else if (key == "params.dt") {
            c.params.dt_override = ctx.number(value);
        } else if (key == "grid.spacing") {
            c.params.spacing = ctx.number(value);
        } else if (key == "run.horizon") {
            c.horizon = ctx.number(value);
        } else if (key == "run.snapshot_times") {
            c.snapshot_times = ctx.list(value);
        } else if (key == "run.tol") {
            c.tol = ctx.number(value);
        } else if (key == "run.max_steps") {
            c.max_steps = ctx.integer(value);
        } else if (key == "run.seed") {
            c.seed = static_cast<std::uint64_t>(ctx.integer(value));
        } else if (key == "continuation.eps_list") {
            c.eps_list = ctx.list(value);
        } else if (key == "comparison.pairs") {
            c.comparison_pairs = static_cast<int>(ctx.integer(value));
        } else if (key == "liouville.m") {
            c.liouville_m = ctx.number(value);
        } else if (key == "liouville.lambda") {
            c.liouville_lambda = ctx.number(value);
        } else if (key == "liouville.ramp_width") {
            c.liouville_ramp_width = ctx.number(value);
        } else if (key == "liouville.delta") {
            c.liouville_delta = ctx.number(value);
        } else if (key == "viscosity.radius") {
            c.viscosity_radius = static_cast<int>(ctx.integer(value));
        } else {
            ctx.fail("unknown key");
        }
    }
    return c;
}

void validate_config(const RunConfig& c) {
    auto field = [](const char* name, const std::exception& e) {
        return Error(std::string(name) + ": " + e.what());
    };
    try {
        c.domain.validate();
    } catch (const Error& e) {
        throw field("domain", e);
    }
    try {
        c.params.validate();
    } catch (const Error& e) {
        throw field("params", e);
    }
    if (c.params.spacing > max_grid_spacing(c.domain)) {
        std::ostringstream os;
        os << "grid.spacing: " << c.params.spacing << " exceeds the limit " << max_grid_spacing(c.domain);
        throw Error(os.str());
    }
    if (!(c.horizon >= 0.0)) throw Error("run.horizon: must be non-negative");
    if (!(c.tol > 0.0)) throw Error("run.tol: must be positive");
    if (c.max_steps < 0) throw Error("run.max_steps: must be non-negative");
    if (c.comparison_pairs < 1) throw Error("comparison.pairs: must be at least 1");
    if (c.viscosity_radius < 1) throw Error("viscosity.radius: must be at least 1");
    if (c.kind == ExperimentKind::Continuation) {
        if (c.eps_list.size() < 3) throw Error("continuation.eps_list: needs at least 3 values");
        for (std::size_t i = 1; i < c.eps_list.size(); ++i)
            if (!(c.eps_list[i] < c.eps_list[i - 1]))
                throw Error("continuation.eps_list: must be strictly decreasing");
        for (double e : c.eps_list)
            if (!(e > 0.0 && e < 1.0)) throw Error("continuation.eps_list: values must lie in (0, 1)");
    }

    // Smoke test at 10 random points of the domain.
    std::mt19937_64 rng(0x5eed);
    const Point ext = c.domain.half_extents();
    int found = 0;
    for (int tries = 0; found < 10 && tries < 100000; ++tries) {
        Point x = c.domain.center;
        for (int k = 0; k < c.domain.dim; ++k)
            x[k] += std::uniform_real_distribution<double>(-ext[k], ext[k])(rng);
        if (signed_distance(c.domain, x) <= 0.0) continue;
        ++found;
        for (const auto* e : {&c.h, &c.g}) {
            const double v = (*e)(x);
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << (e == &c.h ? "data.h" : "data.g") << ": expression '" << e->source()
                   << "' is not finite at (" << x[0] << ", " << x[1] << ", " << x[2] << ")";
                throw Error(os.str());
            }
        }
    }

    if (c.kind != ExperimentKind::Liouville && c.kind != ExperimentKind::Comparison) {
        const IBVP p = c.problem();
        const double mismatch = p.compatibility_mismatch();
        if (!(mismatch <= p.compatibility_tol)) {
            std::ostringstream os;
            os << "data.h / data.g: h and g differ on the boundary, max |h - g| = " << mismatch;
            throw Error(os.str());
        }
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    RunConfig c = parse_config(ss.str(), path.string());
    validate_config(c);
    return c;
}

}  // namespace mcf
