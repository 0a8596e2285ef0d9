// Copyright 2026 The spdevo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spdevo/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "spdevo/error.hpp"

#ifndef SPDEVO_CONFIG_DIR
#define SPDEVO_CONFIG_DIR "configs"
#endif

namespace spdevo {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys{
        {"", {"name", "description", "extends"}},
        {"model",
         {"kind", "length", "intervals", "diffusivity", "alpha", "sigma", "boundary", "boundary_value", "initial",
          "initial_value", "initial_sigma", "modes", "noise_decay"}},
        {"actuation", {"type", "centers", "widths", "boundary_sigma"}},
        {"cost", {"kappa", "regions", "y_regions", "region_names", "desired", "schedule", "terminal_weight"}},
        {"optimizer",
         {"rho", "dt", "horizon", "iterations", "rollouts", "open_loop_iterations", "open_loop_rollouts", "mode",
          "t_sim", "workers"}},
        {"trials", {"count", "seed"}},
        {"output", {"directory", "trajectories", "trajectory_stride"}},
    };
    return keys;
}

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

double to_real(const std::string& field, const std::string& text)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size() || !std::isfinite(v)) {
        throw ConfigError(field + ": expected a number, got '" + text + "'");
    }
    return v;
}

std::uint64_t to_count(const std::string& field, const std::string& text)
{
    const std::string t = trim(text);
    std::uint64_t v = 0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw ConfigError(field + ": expected a non-negative integer, got '" + text + "'");
    }
    return v;
}

bool to_bool(const std::string& field, const std::string& text)
{
    const std::string t = trim(text);
    if (t == "true" || t == "yes" || t == "1" || t == "all") return true;
    if (t == "false" || t == "no" || t == "0" || t == "none") return false;
    throw ConfigError(field + ": expected true/false, got '" + text + "'");
}

std::vector<double> to_reals(const std::string& field, const std::string& text)
{
    std::vector<double> out;
    for (const auto& item : split(text, ',')) {
        out.push_back(to_real(field, item));
    }
    return out;
}

std::pair<double, double> to_range(const std::string& field, const std::string& text)
{
    const auto parts = split(text, ':');
    if (parts.size() != 2) {
        throw ConfigError(field + ": expected lo:hi, got '" + text + "'");
    }
    double lo = to_real(field, parts[0]);
    double hi = to_real(field, parts[1]);
    // Bounds written high-to-low denote the same interval.
    if (lo > hi) {
        std::swap(lo, hi);
    }
    return {lo, hi};
}

/// Reads a file into a ptree and overlays it onto `into`, following `extends`.
void load_tree(const std::filesystem::path& path, pt::ptree& into, int depth);

void overlay(const pt::ptree& src, pt::ptree& dst)
{
    for (const auto& [key, child] : src) {
        if (child.empty()) {
            dst.put_child(pt::ptree::path_type(key, '\0'), child);
        } else {
            auto existing = dst.get_child_optional(pt::ptree::path_type(key, '\0'));
            if (!existing) {
                dst.put_child(pt::ptree::path_type(key, '\0'), pt::ptree{});
            }
            overlay(child, dst.get_child(pt::ptree::path_type(key, '\0')));
        }
    }
}

void read_tree(std::istream& in, const std::filesystem::path& origin, pt::ptree& into, int depth)
{
    if (depth > 8) {
        throw ConfigError("config 'extends' chain is too deep");
    }
    pt::ptree tree;
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ParseError((origin.empty() ? std::string("config") : origin.string()) + ": " + e.message(), e.line());
    }
    if (auto base = tree.get_optional<std::string>(pt::ptree::path_type("extends", '\0'))) {
        const auto base_path = origin.empty() ? std::filesystem::path(*base) : origin.parent_path() / *base;
        load_tree(base_path, into, depth + 1);
        tree.erase("extends");
    }
    overlay(tree, into);
}

void load_tree(const std::filesystem::path& path, pt::ptree& into, int depth)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    read_tree(in, path, into, depth);
}

void check_keys(const pt::ptree& tree)
{
    const auto& keys = known_keys();
    for (const auto& [key, child] : tree) {
        if (child.empty() && child.data().empty() && keys.contains(key) && !key.empty()) {
            continue;
        }
        if (child.empty()) {
            if (!keys.at("").contains(key)) {
                throw ConfigError("unknown top-level key '" + key + "'");
            }
            continue;
        }
        const auto it = keys.find(key);
        if (it == keys.end() || key.empty()) {
            throw ConfigError("unknown section [" + key + "]");
        }
        for (const auto& [name, value] : child) {
            if (!it->second.contains(name)) {
                throw ConfigError("unknown key '" + name + "' in section [" + key + "]");
            }
        }
    }
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> get(const std::string& section, const std::string& key) const
    {
        const pt::ptree* node = &tree_;
        if (!section.empty()) {
            const auto s = tree_.get_child_optional(pt::ptree::path_type(section, '\0'));
            if (!s) {
                return std::nullopt;
            }
            node = &*s;
        }
        if (auto v = node->get_optional<std::string>(pt::ptree::path_type(key, '\0'))) {
            return *v;
        }
        return std::nullopt;
    }

    static std::string field(const std::string& section, const std::string& key)
    {
        return section.empty() ? key : section + "." + key;
    }

    void real(const std::string& s, const std::string& k, double& out) const
    {
        if (auto v = get(s, k)) out = to_real(field(s, k), *v);
    }
    void count(const std::string& s, const std::string& k, std::size_t& out) const
    {
        if (auto v = get(s, k)) out = static_cast<std::size_t>(to_count(field(s, k), *v));
    }

private:
    const pt::ptree& tree_;
};

ExperimentConfig from_tree(const pt::ptree& tree, const std::filesystem::path& origin)
{
    check_keys(tree);
    const Reader r(tree);
    ExperimentConfig cfg;
    cfg.source = origin;
    cfg.name = r.get("", "name").value_or(origin.empty() ? std::string("experiment") : origin.stem().string());
    cfg.description = r.get("", "description").value_or("");

    auto& m = cfg.model;
    if (auto v = r.get("model", "kind")) m.kind = parse_model_kind(trim(*v));
    r.real("model", "length", m.length);
    r.count("model", "intervals", m.intervals);
    r.real("model", "diffusivity", m.diffusivity);
    r.real("model", "alpha", m.alpha);
    r.real("model", "sigma", m.sigma);
    r.real("model", "boundary_value", m.boundary_value);
    r.real("model", "initial_value", m.initial_value);
    r.real("model", "initial_sigma", m.initial_sigma);
    r.count("model", "modes", m.modes);
    r.real("model", "noise_decay", m.noise_decay);
    if (auto v = r.get("model", "boundary")) {
        const auto b = trim(*v);
        if (b == "dirichlet") m.boundary = BoundaryType::Dirichlet;
        else if (b == "neumann") m.boundary = BoundaryType::Neumann;
        else throw ConfigError("model.boundary: expected dirichlet or neumann, got '" + b + "'");
    }
    if (auto v = r.get("model", "initial")) {
        const auto s = trim(*v);
        if (s == "nagumo_front") m.initial = InitialProfile::NagumoFront;
        else if (s == "zero") m.initial = InitialProfile::Zero;
        else if (s == "constant") m.initial = InitialProfile::Constant;
        else if (s == "random") m.initial = InitialProfile::Random;
        else throw ConfigError("model.initial: unknown profile '" + s + "'");
    }

    auto& a = cfg.actuation;
    if (auto v = r.get("actuation", "type")) {
        const auto s = trim(*v);
        if (s == "distributed") a.type = ActuationType::Distributed;
        else if (s == "boundary") a.type = ActuationType::Boundary;
        else throw ConfigError("actuation.type: expected distributed or boundary, got '" + s + "'");
    }
    if (auto v = r.get("actuation", "centers")) {
        if (m.kind == ModelKind::Heat2D) {
            for (const auto& item : split(*v, ',')) {
                std::istringstream is(item);
                std::string xs, ys, extra;
                if (!(is >> xs >> ys) || (is >> extra)) {
                    throw ConfigError("actuation.centers: expected 'x y' pairs, got '" + item + "'");
                }
                a.centers_2d.push_back({to_real("actuation.centers", xs), to_real("actuation.centers", ys)});
            }
        } else {
            a.centers = to_reals("actuation.centers", *v);
        }
    }
    if (auto v = r.get("actuation", "widths")) a.widths = to_reals("actuation.widths", *v);
    if (auto v = r.get("actuation", "boundary_sigma")) a.boundary_sigma = to_real("actuation.boundary_sigma", *v);

    auto& c = cfg.cost;
    r.real("cost", "kappa", c.kappa);
    r.real("cost", "terminal_weight", c.terminal_weight);
    if (auto v = r.get("cost", "regions")) {
        for (const auto& item : split(*v, ',')) {
            const auto [lo, hi] = to_range("cost.regions", item);
            RegionBlock region;
            region.x_lo = lo;
            region.x_hi = hi;
            c.regions.push_back(region);
        }
    }
    if (auto v = r.get("cost", "y_regions")) {
        const auto items = split(*v, ',');
        if (items.size() != c.regions.size()) {
            throw ConfigError("cost.y_regions: expected " + std::to_string(c.regions.size()) + " ranges");
        }
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto [lo, hi] = to_range("cost.y_regions", items[i]);
            c.regions[i].y_lo = lo;
            c.regions[i].y_hi = hi;
        }
    }
    if (auto v = r.get("cost", "desired")) {
        const auto values = to_reals("cost.desired", *v);
        if (values.size() != 1 && values.size() != c.regions.size()) {
            throw ConfigError("cost.desired: expected 1 or " + std::to_string(c.regions.size()) + " values");
        }
        for (std::size_t i = 0; i < c.regions.size(); ++i) {
            c.regions[i].desired = values.size() == 1 ? values[0] : values[i];
        }
    }
    if (auto v = r.get("cost", "region_names")) {
        const auto names = split(*v, ',');
        if (names.size() != c.regions.size()) {
            throw ConfigError("cost.region_names: expected " + std::to_string(c.regions.size()) + " names");
        }
        for (std::size_t i = 0; i < names.size(); ++i) {
            c.regions[i].name = names[i];
        }
    }
    for (std::size_t i = 0; i < c.regions.size(); ++i) {
        if (c.regions[i].name.empty()) {
            c.regions[i].name = "S" + std::to_string(i + 1);
        }
    }
    if (auto v = r.get("cost", "schedule")) {
        for (const auto& item : split(*v, ',')) {
            const auto parts = split(item, ':');
            if (parts.size() != 2) {
                throw ConfigError("cost.schedule: expected until:value, got '" + item + "'");
            }
            c.schedule.push_back({to_real("cost.schedule", parts[0]), to_real("cost.schedule", parts[1])});
        }
    }

    auto& o = cfg.optimizer;
    r.real("optimizer", "rho", o.rho);
    r.real("optimizer", "dt", o.dt);
    r.real("optimizer", "horizon", o.horizon);
    r.count("optimizer", "iterations", o.iterations);
    r.count("optimizer", "rollouts", o.rollouts);
    r.count("optimizer", "open_loop_iterations", o.open_loop_iterations);
    r.count("optimizer", "open_loop_rollouts", o.open_loop_rollouts);
    r.real("optimizer", "t_sim", o.t_sim);
    r.count("optimizer", "workers", o.workers);
    if (auto v = r.get("optimizer", "mode")) o.mode = parse_control_mode(trim(*v));

    r.count("trials", "count", cfg.trials.count);
    if (auto v = r.get("trials", "seed")) cfg.trials.seed = to_count("trials.seed", *v);

    if (auto v = r.get("output", "directory")) cfg.output.directory = trim(*v);
    if (auto v = r.get("output", "trajectories")) cfg.output.trajectories = to_bool("output.trajectories", *v);
    r.count("output", "trajectory_stride", cfg.output.trajectory_stride);

    cfg.validate();
    return cfg;
}

void require_fraction(const std::string& field, double v)
{
    if (!(v >= 0.0 && v <= 1.0)) {
        throw ConfigError(field + ": fraction " + std::to_string(v) + " outside [0, 1]");
    }
}

std::size_t whole_steps(const std::string& field, double span, double dt)
{
    const double ratio = span / dt;
    const double rounded = std::round(ratio);
    if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-6 * std::max(1.0, ratio)) {
        throw ConfigError(field + " must be a positive multiple of optimizer.dt");
    }
    return static_cast<std::size_t>(rounded);
}

} // namespace

std::string_view to_string(ControlMode mode) noexcept
{
    return mode == ControlMode::Mpc ? "mpc" : "open-loop";
}

ControlMode parse_control_mode(std::string_view name)
{
    if (name == "mpc") return ControlMode::Mpc;
    if (name == "open-loop" || name == "open_loop" || name == "openloop") return ControlMode::OpenLoop;
    throw ConfigError("optimizer.mode: expected open-loop or mpc, got '" + std::string(name) + "'");
}

std::size_t OptimizerBlock::horizon_steps() const { return whole_steps("optimizer.horizon", horizon, dt); }

std::size_t OptimizerBlock::total_steps() const { return whole_steps("optimizer.t_sim", t_sim, dt); }

void ExperimentConfig::validate() const
{
    if (!(model.length > 0.0)) throw ConfigError("model.length must be positive");
    if (model.intervals < 2) throw ConfigError("model.intervals must be at least 2");
    if (!(model.diffusivity > 0.0)) throw ConfigError("model.diffusivity must be positive");
    if (!(model.sigma >= 0.0)) throw ConfigError("model.sigma must be non-negative");
    if (model.initial_sigma < 0.0) throw ConfigError("model.initial_sigma must be non-negative");
    if (model.noise_decay < 0.0) throw ConfigError("model.noise_decay must be non-negative");
    if (model.kind == ModelKind::Heat2D && model.boundary != BoundaryType::Dirichlet) {
        throw ConfigError("model.boundary: heat2d requires dirichlet edges");
    }
    if (model.kind == ModelKind::Burgers1D && model.boundary != BoundaryType::Dirichlet) {
        throw ConfigError("model.boundary: burgers requires dirichlet ends");
    }

    if (actuation.type == ActuationType::Boundary) {
        if (model.kind != ModelKind::Heat1D || model.boundary != BoundaryType::Neumann) {
            throw ConfigError("actuation.type: boundary control needs model.kind = heat1d with neumann boundary");
        }
        if (actuation.boundary_sigma && *actuation.boundary_sigma < 0.0) {
            throw ConfigError("actuation.boundary_sigma must be non-negative");
        }
    } else {
        const std::size_t n = is_2d() ? actuation.centers_2d.size() : actuation.centers.size();
        if (n == 0) throw ConfigError("actuation.centers: at least one actuator is required");
        for (double v : actuation.centers) require_fraction("actuation.centers", v);
        for (const auto& p : actuation.centers_2d) {
            require_fraction("actuation.centers", p[0]);
            require_fraction("actuation.centers", p[1]);
        }
        if (actuation.widths.size() != 1 && actuation.widths.size() != n) {
            throw ConfigError("actuation.widths: expected 1 or " + std::to_string(n) + " values");
        }
        for (double w : actuation.widths) {
            if (!(w > 0.0 && w <= 1.0)) throw ConfigError("actuation.widths: fractions must lie in (0, 1]");
        }
    }

    if (!(cost.kappa > 0.0)) throw ConfigError("cost.kappa must be positive");
    if (cost.regions.empty()) throw ConfigError("cost.regions: at least one region is required");
    for (const auto& reg : cost.regions) {
        require_fraction("cost.regions", reg.x_lo);
        require_fraction("cost.regions", reg.x_hi);
        require_fraction("cost.y_regions", reg.y_lo);
        require_fraction("cost.y_regions", reg.y_hi);
    }
    if (cost.terminal_weight < 0.0) throw ConfigError("cost.terminal_weight must be non-negative");
    for (std::size_t i = 1; i < cost.schedule.size(); ++i) {
        if (!(cost.schedule[i].until > cost.schedule[i - 1].until)) {
            throw ConfigError("cost.schedule: times must increase");
        }
    }

    if (!(optimizer.rho > 0.0)) throw ConfigError("optimizer.rho must be positive");
    if (!(optimizer.dt > 0.0)) throw ConfigError("optimizer.dt must be positive");
    if (optimizer.rollouts < 1) throw ConfigError("optimizer.rollouts must be at least 1");
    const std::size_t total = optimizer.total_steps();
    const std::size_t horizon = optimizer.horizon_steps();
    if (optimizer.mode == ControlMode::Mpc && horizon > total) {
        throw ConfigError("optimizer.horizon exceeds optimizer.t_sim in mpc mode");
    }
    if (trials.count < 1) throw ConfigError("trials.count must be at least 1");
    if (output.trajectory_stride < 1) throw ConfigError("output.trajectory_stride must be at least 1");
}

std::vector<std::string> ExperimentConfig::warnings() const
{
    std::vector<std::string> out;
    const double noise = actuation.type == ActuationType::Boundary ? actuation.boundary_sigma.value_or(model.sigma)
                                                                     : model.sigma;
    const double expected = 1.0 / std::sqrt(optimizer.rho);
    if (noise > 0.0 && std::abs(noise - expected) > 1e-9 * expected) {
        out.push_back("control-channel noise amplitude " + std::to_string(noise) + " differs from 1/sqrt(rho) = " +
                      std::to_string(expected) + "; importance weights assume they match");
    }
    if (noise == 0.0) {
        out.push_back("control-channel noise is zero; the optimizer cannot explore and controls stay unchanged");
    }
    return out;
}

ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& origin)
{
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    read_tree(in, origin, tree, 0);
    return from_tree(tree, origin);
}

ExperimentConfig load_config(const std::filesystem::path& path)
{
    pt::ptree tree;
    load_tree(path, tree, 0);
    return from_tree(tree, path);
}

std::filesystem::path bundled_config_dir()
{
    if (const char* env = std::getenv("SPDEVO_CONFIG_DIR"); env && *env) {
        return env;
    }
    return SPDEVO_CONFIG_DIR;
}

std::vector<BundledExperiment> list_experiments(const std::filesystem::path& dir)
{
    std::vector<BundledExperiment> out;
    if (!std::filesystem::is_directory(dir)) {
        return out;
    }
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".cfg") {
            continue;
        }
        const auto cfg = load_config(entry.path());
        out.push_back({entry.path().stem().string(), cfg.description, entry.path()});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.name < b.name; });
    return out;
}

} // namespace spdevo
