#include "sinhp/config.hpp"

#include "sinhp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace sinhp {

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                          "': cannot parse '" + v + "' as a number");
    }
}

long parse_int(const std::string& v, const std::string& key, int line) {
    try {
        size_t pos = 0;
        const long x = std::stol(v, &pos);
        if (pos != v.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (...) {
        throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                          "': cannot parse '" + v + "' as an integer");
    }
}

bool parse_bool(const std::string& v, const std::string& key, int line) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                      "': expected true/false, got '" + v + "'");
}

std::vector<std::string> split(const std::string& v, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : v) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty() || !out.empty()) out.push_back(trim(cur));
    while (!out.empty() && out.back().empty()) out.pop_back();
    return out;
}

std::vector<double> parse_doubles(const std::string& v, const std::string& key, int line) {
    std::vector<double> out;
    for (const auto& tok : split(v, ','))
        if (!tok.empty()) out.push_back(parse_double(tok, key, line));
    return out;
}

std::vector<int> parse_ints(const std::string& v, const std::string& key, int line) {
    std::vector<int> out;
    for (const auto& tok : split(v, ','))
        if (!tok.empty()) out.push_back(static_cast<int>(parse_int(tok, key, line)));
    return out;
}

/// "(x, y); (x, y); ..."
std::vector<Point> parse_points(const std::string& v, const std::string& key, int line) {
    std::vector<Point> out;
    for (const auto& tok : split(v, ';')) {
        if (tok.empty()) continue;
        std::string t = tok;
        if (t.front() != '(' || t.back() != ')')
            throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                              "': point must look like (x, y)");
        t = t.substr(1, t.size() - 2);
        const auto parts = split(t, ',');
        if (parts.size() != 2)
            throw ConfigError("config line " + std::to_string(line) + ": key '" + key +
                              "': point must have two coordinates");
        out.emplace_back(parse_double(parts[0], key, line), parse_double(parts[1], key, line));
    }
    return out;
}

} // namespace

RunConfig parse_config_text(const std::string& text, const std::string& origin) {
    RunConfig cfg;
    std::istringstream is(text);
    std::string raw;
    int line = 0;
    std::map<std::string, bool> seen;
    while (std::getline(is, raw)) {
        ++line;
        const auto hash_pos = raw.find('#');
        std::string s = trim(hash_pos == std::string::npos ? raw : raw.substr(0, hash_pos));
        if (s.empty()) continue;
        const auto eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + " line " + std::to_string(line) +
                              ": expected 'key = value', got '" + s + "'");
        const std::string key = trim(s.substr(0, eq));
        const std::string val = trim(s.substr(eq + 1));
        if (seen[key])
            throw ConfigError(origin + " line " + std::to_string(line) + ": duplicate key '" +
                              key + "'");
        seen[key] = true;

        if (key == "domain.type") cfg.domain_type = val;
        else if (key == "domain.radius") cfg.radius = parse_double(val, key, line);
        else if (key == "domain.r_inner") cfg.r_inner = parse_double(val, key, line);
        else if (key == "domain.r_outer") cfg.r_outer = parse_double(val, key, line);
        else if (key == "domain.cos_coeffs") cfg.cos_coeffs = parse_doubles(val, key, line);
        else if (key == "grid.n_radial") cfg.n_radial = static_cast<int>(parse_int(val, key, line));
        else if (key == "grid.n_angular") cfg.n_angular = static_cast<int>(parse_int(val, key, line));
        else if (key == "grid.grading") cfg.grading = parse_double(val, key, line);
        else if (key == "grid.lambda_max_check") cfg.lambda_max_check = parse_bool(val, key, line);
        else if (key == "lambda") cfg.lambda_list = parse_doubles(val, key, line);
        else if (key == "epsilon") cfg.epsilon_list = parse_doubles(val, key, line);
        else if (key == "regime.alpha") cfg.alpha = parse_double(val, key, line);
        else if (key == "regime.eps0") cfg.eps0 = parse_double(val, key, line);
        else if (key == "regime.allow_out_of_regime") cfg.allow_out_of_regime = parse_bool(val, key, line);
        else if (key == "points.m") cfg.m = static_cast<int>(parse_int(val, key, line));
        else if (key == "points.spins") cfg.spins = parse_ints(val, key, line);
        else if (key == "points.mode") cfg.mode = val;
        else if (key == "points.components") cfg.components = parse_ints(val, key, line);
        else if (key == "points.coords") cfg.explicit_points = parse_points(val, key, line);
        else if (key == "feasible.K") cfg.K = parse_double(val, key, line);
        else if (key == "feasible.delta_sep") cfg.delta_sep = parse_double(val, key, line);
        else if (key == "sigma") cfg.sigma = parse_double(val, key, line);
        else if (key == "mass_rule") cfg.mass_rule = val;
        else if (key == "optimizer.starts") cfg.opt_starts = static_cast<int>(parse_int(val, key, line));
        else if (key == "optimizer.max_iterations") cfg.opt_max_iterations = static_cast<int>(parse_int(val, key, line));
        else if (key == "newton.tol_rel") cfg.newton_tol_rel = parse_double(val, key, line);
        else if (key == "newton.max_iterations") cfg.newton_max_iterations = static_cast<int>(parse_int(val, key, line));
        else if (key == "green.sources") cfg.green_sources = parse_points(val, key, line);
        else if (key == "green.targets") cfg.green_targets = parse_points(val, key, line);
        else if (key == "output.dir") cfg.out_dir = val;
        else if (key == "output.fields") cfg.write_fields = parse_bool(val, key, line);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(val, key, line));
        else if (key == "workers") cfg.workers = static_cast<int>(parse_int(val, key, line));
        else
            throw ConfigError(origin + " line " + std::to_string(line) + ": unknown key '" + key +
                              "'");
    }
    cfg.validate();
    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config_text(ss.str(), path);
}

Domain RunConfig::make_domain() const {
    if (domain_type == "disk") return Domain::disk(radius);
    if (domain_type == "annulus") return Domain::annulus(r_inner, r_outer);
    if (domain_type == "star") return Domain::star(cos_coeffs);
    throw ConfigError("domain.type must be disk, annulus or star (got '" + domain_type + "')");
}

FeasibleSet RunConfig::make_feasible_set(const Domain& domain) const {
    if (mode == "axis_symmetric") return FeasibleSet::axis(domain, K, delta_sep);
    if (mode == "per_component") return FeasibleSet::per_component(domain, components, K, delta_sep);
    if (mode == "free") return FeasibleSet::free_set(domain, K, delta_sep);
    throw ConfigError("points.mode must be axis_symmetric, per_component or free");
}

MassRule RunConfig::make_mass_rule() const {
    if (mass_rule == "as_written") return MassRule::as_written;
    if (mass_rule == "spin_product") return MassRule::spin_product;
    throw ConfigError("mass_rule must be as_written or spin_product");
}

void RunConfig::validate() const {
    make_domain();
    if (static_cast<int>(spins.size()) != m)
        throw ConfigError("points.spins must list exactly m = " + std::to_string(m) + " values");
    for (int s : spins)
        if (s != 1 && s != -1) throw ConfigError("spin must be +-1");
    if (mode == "per_component" && static_cast<int>(components.size()) != m)
        throw ConfigError("points.components must list exactly m values in per_component mode");
    if (!explicit_points.empty() && static_cast<int>(explicit_points.size()) != m)
        throw ConfigError("points.coords must list exactly m points");
    if (lambda_list.empty() || epsilon_list.empty())
        throw ConfigError("lambda and epsilon lists must be nonempty");
    for (double l : lambda_list)
        if (!(l > 1)) throw ConfigError("lambda values must exceed 1");
    for (double e : epsilon_list)
        if (!(e > 0 && e < 1)) throw ConfigError("epsilon values must lie in (0,1)");
    if (!(K > 1)) throw ConfigError("feasible.K must exceed 1");
    if (!(sigma > 0 && sigma < 1)) throw ConfigError("sigma must lie in (0,1)");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (mass_rule != "as_written" && mass_rule != "spin_product")
        throw ConfigError("mass_rule must be as_written or spin_product");
    if (!allow_out_of_regime) {
        for (double e : epsilon_list) {
            for (double l : lambda_list) {
                if (e * std::pow(l, alpha) > eps0) {
                    std::ostringstream os;
                    os << "pair (epsilon = " << e << ", lambda = " << l
                       << ") fails the regime check epsilon * lambda^alpha <= eps0 (alpha = "
                       << alpha << ", eps0 = " << eps0
                       << "); set regime.allow_out_of_regime = true to override";
                    throw ConfigError(os.str());
                }
            }
        }
    }
}

std::string RunConfig::canonical() const {
    std::ostringstream os;
    os.precision(17);
    auto pts = [](const std::vector<Point>& v) {
        std::ostringstream p;
        p.precision(17);
        for (const auto& x : v) p << "(" << x.x() << "," << x.y() << ");";
        return p.str();
    };
    os << "alpha=" << alpha << "\n";
    os << "allow_out_of_regime=" << allow_out_of_regime << "\n";
    os << "components=";
    for (int c : components) os << c << ",";
    os << "\ncos_coeffs=";
    for (double c : cos_coeffs) os << c << ",";
    os << "\ndelta_sep=" << (delta_sep ? *delta_sep : -1.0) << "\n";
    os << "domain_type=" << domain_type << "\n";
    os << "eps0=" << eps0 << "\n";
    os << "epsilon=";
    for (double e : epsilon_list) os << e << ",";
    os << "\nexplicit_points=" << pts(explicit_points) << "\n";
    os << "grading=" << grading << "\n";
    os << "green_sources=" << pts(green_sources) << "\n";
    os << "green_targets=" << pts(green_targets) << "\n";
    os << "K=" << K << "\n";
    os << "lambda=";
    for (double l : lambda_list) os << l << ",";
    os << "\nlambda_max_check=" << lambda_max_check << "\n";
    os << "m=" << m << "\n";
    os << "mass_rule=" << mass_rule << "\n";
    os << "mode=" << mode << "\n";
    os << "n_angular=" << n_angular << "\n";
    os << "n_radial=" << n_radial << "\n";
    os << "newton_max_iterations=" << newton_max_iterations << "\n";
    os << "newton_tol_rel=" << newton_tol_rel << "\n";
    os << "opt_max_iterations=" << opt_max_iterations << "\n";
    os << "opt_starts=" << opt_starts << "\n";
    os << "r_inner=" << r_inner << "\n";
    os << "r_outer=" << r_outer << "\n";
    os << "radius=" << radius << "\n";
    os << "seed=" << seed << "\n";
    os << "sigma=" << sigma << "\n";
    os << "spins=";
    for (int s : spins) os << s << ",";
    os << "\nwrite_fields=" << write_fields << "\n";
    os << "workers=" << workers << "\n";
    return os.str();
}

std::string RunConfig::hash() const {
    const std::string s = canonical();
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace sinhp
