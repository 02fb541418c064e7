#include "ergctl/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace ergctl {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidParameter(message);
}

} // namespace

std::string to_string(ModelKind kind) {
    switch (kind) {
        case ModelKind::FilteredInventory: return "filtered_inventory";
        case ModelKind::OUInventory: return "ou_inventory";
        case ModelKind::Custom1DFactor: return "custom_1d_factor";
        case ModelKind::DegenerateNoFactor: return "degenerate_no_factor";
    }
    return "?";
}

double ModelSpec::param(const std::string& name) const {
    auto it = params.find(name);
    if (it == params.end())
        throw InvalidParameter("missing parameter '" + name + "' for model " + to_string(kind));
    return it->second;
}

static void attach_quadratic_cost(ModelSpec& spec, const CostSpec& cost) {
    require(cost.weight > 0, "cost weight must be positive");
    const double w = cost.weight, t = cost.target;
    spec.c = [w, t](double x, double) { double d = x - t; return w * d * d; };
    spec.c_x = [w, t](double x, double) { return 2.0 * w * (x - t); };
    spec.c_x_inverse = [w, t](double z) { return t + z / (2.0 * w); };
    spec.params["cost_target"] = t;
    spec.params["cost_weight"] = w;
}

ModelSpec make_filtered_inventory_model(double m1, double m2, double sigma, double delta,
                                        double lambda1, double lambda2,
                                        double K_plus, double K_minus,
                                        const CostSpec& cost, double eps_y) {
    require(m1 > m2, "m1 must exceed m2");
    require(sigma > 0, "sigma must be positive");
    require(delta > 0, "delta must be positive");
    require(lambda1 > 0, "lambda1 must be positive");
    require(lambda2 > 0, "lambda2 must be positive");
    require(K_plus > 0, "K_plus must be positive");
    require(K_minus > 0, "K_minus must be positive");
    require(eps_y > 0 && eps_y < 0.5, "eps_y must lie in (0, 0.5)");

    const double gamma = (m1 - m2) / sigma;

    ModelSpec spec;
    spec.kind = ModelKind::FilteredInventory;
    spec.b = [m1, m2, delta](double x, double y) { return m2 + (m1 - m2) * y - delta * x; };
    spec.b_x = [delta](double, double) { return -delta; };
    spec.sigma = [sigma](double, double) { return sigma; };
    spec.sigma_x = [](double, double) { return 0.0; };
    spec.eta = [lambda1, lambda2](double y) { return lambda2 - (lambda1 + lambda2) * y; };
    spec.zeta = [gamma](double y) { return gamma * y * (1.0 - y); };
    spec.rho = 1.0;
    spec.K_plus = K_plus;
    spec.K_minus = K_minus;
    spec.factor_domain = {eps_y, 1.0 - eps_y};
    spec.params = {{"m1", m1}, {"m2", m2}, {"sigma", sigma}, {"delta", delta},
                   {"lambda1", lambda1}, {"lambda2", lambda2}, {"gamma", gamma},
                   {"eps_y", eps_y}};
    attach_quadratic_cost(spec, cost);
    return spec;
}

ModelSpec make_ou_inventory_model(double m, double b, double delta,
                                  double sigma1, double sigma2, double rho,
                                  double K_plus, double K_minus) {
    require(delta > 0, "delta must be positive");
    require(b > delta, "Assumption b > delta violated");
    require(sigma1 > 0, "sigma1 must be positive");
    require(sigma2 > 0, "sigma2 must be positive");
    require(std::abs(rho) < 1, "correlation rho must satisfy |rho| < 1");
    require(K_plus > 0, "K_plus must be positive");
    require(K_minus > 0, "K_minus must be positive");

    ModelSpec spec;
    spec.kind = ModelKind::OUInventory;
    spec.b = [delta](double x, double y) { return y - delta * x; };
    spec.b_x = [delta](double, double) { return -delta; };
    spec.sigma = [sigma1](double, double) { return sigma1; };
    spec.sigma_x = [](double, double) { return 0.0; };
    spec.eta = [m, b](double y) { return m - b * y; };
    spec.zeta = [sigma2](double) { return sigma2; };
    spec.rho = rho;
    spec.K_plus = K_plus;
    spec.K_minus = K_minus;
    const double sd = sigma2 / std::sqrt(2.0 * b);
    spec.factor_domain = {m / b - 6.0 * sd, m / b + 6.0 * sd};
    spec.params = {{"m", m}, {"b", b}, {"delta", delta},
                   {"sigma1", sigma1}, {"sigma2", sigma2}, {"rho", rho}};
    attach_quadratic_cost(spec, CostSpec{0.0, 0.5});
    return spec;
}

ModelSpec make_degenerate_model(double delta, double sigma,
                                double K_plus, double K_minus,
                                const CostSpec& cost,
                                double y_lo, double y_hi) {
    require(delta > 0, "delta must be positive");
    require(sigma > 0, "sigma must be positive");
    require(K_plus > 0, "K_plus must be positive");
    require(K_minus > 0, "K_minus must be positive");
    require(y_lo < y_hi, "factor interval must be nonempty");

    ModelSpec spec;
    spec.kind = ModelKind::DegenerateNoFactor;
    spec.b = [delta](double x, double y) { return y - delta * x; };
    spec.b_x = [delta](double, double) { return -delta; };
    spec.sigma = [sigma](double, double) { return sigma; };
    spec.sigma_x = [](double, double) { return 0.0; };
    spec.eta = [](double) { return 0.0; };
    spec.zeta = [](double) { return 0.0; };
    spec.rho = 0.0;
    spec.K_plus = K_plus;
    spec.K_minus = K_minus;
    spec.factor_domain = {y_lo, y_hi};
    spec.params = {{"delta", delta}, {"sigma", sigma}};
    attach_quadratic_cost(spec, cost);
    return spec;
}

ValidationReport validate_params(const ModelSpec& spec) {
    ValidationReport report;
    auto add = [&](const std::string& name, bool pass, const std::string& message) {
        report.checks.push_back({name, pass, message});
        report.overall = report.overall && pass;
    };

    add("action_costs_positive", spec.K_plus > 0 && spec.K_minus > 0,
        "K_plus=" + fmt(spec.K_plus) + " K_minus=" + fmt(spec.K_minus));

    const double ymid = 0.5 * (spec.factor_domain.lo + spec.factor_domain.hi);
    add("sigma_positive", spec.sigma(0.0, ymid) > 0, "sampled at (0, y mid)");

    switch (spec.kind) {
        case ModelKind::FilteredInventory: {
            const double gamma = spec.param("gamma");
            const double l1 = spec.param("lambda1"), l2 = spec.param("lambda2");
            const double delta = spec.param("delta");
            add("gamma_positive", gamma > 0, "gamma=" + fmt(gamma));
            add("factor_domain_in_unit_interval",
                spec.factor_domain.lo > 0 && spec.factor_domain.hi < 1,
                "(" + fmt(spec.factor_domain.lo) + ", " + fmt(spec.factor_domain.hi) + ")");
            const double bound = std::max(gamma * gamma - (l1 + l2), 0.0);
            add("delta_above_quadratic_cost_bound", delta > bound,
                "need delta > max(gamma^2 - (lambda1+lambda2), 0) = " + fmt(bound) +
                ", have delta = " + fmt(delta));
            break;
        }
        case ModelKind::OUInventory: {
            const double b = spec.param("b"), delta = spec.param("delta");
            add("mean_reversion_dominates", b > delta,
                "need b > delta, have b=" + fmt(b) + " delta=" + fmt(delta));
            add("correlation_strict", std::abs(spec.rho) < 1, "rho=" + fmt(spec.rho));
            break;
        }
        default:
            break;
    }
    return report;
}

CoefficientSample eval_coefficients(const ModelSpec& spec, double x, double y) {
    if (spec.kind == ModelKind::FilteredInventory &&
        (y < 0.0 || y > 1.0))
        throw DomainError("factor value " + fmt(y) + " outside [0,1]");

    CoefficientSample s{};
    s.b = spec.b(x, y);
    s.b_x = spec.b_x(x, y);
    s.sigma = spec.sigma(x, y);
    s.sigma_x = spec.sigma_x(x, y);
    s.eta = spec.eta(y);
    s.zeta = spec.zeta(y);
    s.rho_zeta = spec.rho * s.zeta;
    s.c = spec.c(x, y);
    s.c_x = spec.c_x(x, y);
    s.hat_drift_x = s.b + s.sigma * s.sigma_x;
    s.hat_drift_y = s.eta + s.sigma_x * s.rho_zeta;
    return s;
}

namespace {

void check_keys(const nlohmann::json& j, const std::set<std::string>& allowed,
                const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
}

double get_num(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key))
        throw ConfigError("missing key '" + key + "'");
    if (!j[key].is_number())
        throw ConfigError("key '" + key + "' must be a number");
    return j[key].get<double>();
}

CostSpec cost_from_json(const nlohmann::json& j) {
    check_keys(j, {"kind", "target", "weight"}, "cost");
    if (j.value("kind", "quadratic") != "quadratic")
        throw ConfigError("only cost kind 'quadratic' is supported");
    CostSpec cost;
    if (j.contains("target")) cost.target = get_num(j, "target");
    if (j.contains("weight")) cost.weight = get_num(j, "weight");
    return cost;
}

} // namespace

ModelSpec model_from_json(const nlohmann::json& j) {
    check_keys(j, {"kind", "params", "cost", "K_plus", "K_minus"}, "model");
    if (!j.contains("kind")) throw ConfigError("model: missing 'kind'");
    const std::string kind = j["kind"].get<std::string>();
    const double Kp = get_num(j, "K_plus");
    const double Km = get_num(j, "K_minus");
    const nlohmann::json params = j.value("params", nlohmann::json::object());

    try {
        if (kind == "filtered_inventory") {
            check_keys(params, {"m1", "m2", "sigma", "delta", "lambda1", "lambda2", "eps_y"},
                       "params");
            CostSpec cost;
            if (j.contains("cost")) cost = cost_from_json(j["cost"]);
            const double eps_y = params.contains("eps_y") ? get_num(params, "eps_y") : 1e-3;
            return make_filtered_inventory_model(
                get_num(params, "m1"), get_num(params, "m2"), get_num(params, "sigma"),
                get_num(params, "delta"), get_num(params, "lambda1"),
                get_num(params, "lambda2"), Kp, Km, cost, eps_y);
        }
        if (kind == "ou_inventory") {
            if (j.contains("cost"))
                throw ConfigError("ou_inventory uses the fixed cost x^2/2");
            check_keys(params, {"m", "b", "delta", "sigma1", "sigma2", "rho"}, "params");
            return make_ou_inventory_model(
                get_num(params, "m"), get_num(params, "b"), get_num(params, "delta"),
                get_num(params, "sigma1"), get_num(params, "sigma2"),
                get_num(params, "rho"), Kp, Km);
        }
        if (kind == "degenerate_no_factor") {
            check_keys(params, {"delta", "sigma", "y_lo", "y_hi"}, "params");
            CostSpec cost;
            if (j.contains("cost")) cost = cost_from_json(j["cost"]);
            const double y_lo = params.contains("y_lo") ? get_num(params, "y_lo") : -1.0;
            const double y_hi = params.contains("y_hi") ? get_num(params, "y_hi") : 1.0;
            return make_degenerate_model(get_num(params, "delta"), get_num(params, "sigma"),
                                         Kp, Km, cost, y_lo, y_hi);
        }
    } catch (const InvalidParameter& e) {
        throw ConfigError(std::string("model: ") + e.what());
    }
    throw ConfigError("unknown model kind '" + kind + "'");
}

double z_of_xy(const ModelSpec& spec, double x, double y) {
    const double gamma = spec.param("gamma"), sigma = spec.param("sigma");
    return (sigma / gamma) * std::log(y / (1.0 - y)) - x;
}

double y_of_xz(const ModelSpec& spec, double x, double z) {
    const double gamma = spec.param("gamma"), sigma = spec.param("sigma");
    const double e = std::clamp((gamma / sigma) * (z + x), -500.0, 500.0);
    return 1.0 / (1.0 + std::exp(-e));
}

XZDrift filtered_xz_drift(const ModelSpec& spec, double x, double z) {
    const double gamma = spec.param("gamma"), sigma = spec.param("sigma");
    const double m1 = spec.param("m1"), m2 = spec.param("m2");
    const double l1 = spec.param("lambda1"), l2 = spec.param("lambda2");
    const double delta = spec.param("delta");

    const double e = std::clamp((gamma / sigma) * (z + x), -500.0, 500.0);
    const double y = 1.0 / (1.0 + std::exp(-e));
    const double my = m2 + (m1 - m2) * y;

    XZDrift d;
    d.mu = my - delta * x;
    // (1 + e^{-e})(l2 - l1 e^{e}) expanded to avoid overflow products
    const double bracket = l2 + l2 * std::exp(-e) - l1 * std::exp(e) - l1;
    d.q = sigma * gamma * (y - 0.5) + (sigma / gamma) * bracket - my + delta * x;
    return d;
}

Interval default_x_domain(const ModelSpec& spec) {
    const double ymid = 0.5 * (spec.factor_domain.lo + spec.factor_domain.hi);
    const double delta = -spec.b_x(0.0, ymid);
    const double hw = std::max(spec.K_plus, spec.K_minus) / std::max(delta, 1e-12) + 10.0;
    return {-hw, hw};
}

} // namespace ergctl
