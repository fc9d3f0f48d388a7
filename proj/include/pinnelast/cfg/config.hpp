#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pinnelast/elast/loss.hpp"
#include "pinnelast/geom/geometry.hpp"
#include "pinnelast/geom/sampling.hpp"
#include "pinnelast/train/schedule.hpp"

namespace pinnelast::cfg {

using nlohmann::json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class IbcMode { soft, hard };
enum class FormulationKind { mixed, displacement };
enum class DistanceKind { analytic, learned };

struct NetSize {
    int hidden = 2;
    int width = 20;
};

struct PretrainConfig {
    train::Schedule particular_schedule;
    double particular_tolerance = 1e-5;
    train::Schedule distance_schedule;
    double distance_tolerance = 1e-4;
    int distance_grid = 400;     // Cartesian sample points for the distance fit
    int distance_surface = 60;   // extra points on the hole/source circle
    int distance_t0 = 200;       // points for the zero-velocity term (dynamic)
};

struct EvalConfig {
    int grid_nx = 60, grid_ny = 60;
    std::vector<double> snapshot_times;  // dynamic problems
};

struct ExperimentConfig {
    std::string name = "experiment";
    geom::Geometry geometry;
    std::vector<geom::BoundarySegment> segments;
    elast::Material material;
    elast::BodyForce body_force;
    geom::InitialCondition initial;
    double t0 = 0, t1 = 0;  // t1 > t0 marks a dynamic problem
    IbcMode mode = IbcMode::soft;
    FormulationKind formulation = FormulationKind::mixed;
    DistanceKind distance = DistanceKind::analytic;
    bool pin_stress_at_t0 = false;

    NetSize net_single{4, 20};
    NetSize net_particular{2, 5};
    NetSize net_distance{4, 10};
    NetSize net_general{4, 30};
    double stress_scale = 1.0;
    double disp_scale = 1.0;

    geom::CollocationConfig collocation;
    elast::LossWeights weights;
    train::Schedule schedule;
    PretrainConfig pretrain;
    EvalConfig eval;

    std::uint64_t seed = 1;
    int threads = 2;

    bool dynamic() const { return t1 > t0; }

    void validate() const {
        geometry.validate();
        material.validate();
        weights.validate();
        schedule.validate();
        if (segments.empty()) throw ConfigError("config: at least one boundary segment required");
        if (!collocation.per_segment.empty() &&
            collocation.per_segment.size() != segments.size())
            throw ConfigError("config: collocation.per_segment length must match segments");
        if (material.rho > 0 && !dynamic())
            throw ConfigError("config: rho > 0 requires a time extent (dynamic problem)");
        if (dynamic() && material.rho <= 0)
            throw ConfigError("config: dynamic problem requires rho > 0");
        if (formulation == FormulationKind::displacement && mode == IbcMode::hard)
            throw ConfigError(
                "config: hard enforcement needs the mixed formulation (stress outputs)");
        if (collocation.interior < 1) throw ConfigError("config: interior count must be >= 1");
    }
};

// --- json helpers ------------------------------------------------------------

namespace detail_cfg {

template <class T>
T get_or(const json& j, const std::string& key, T def) {
    if (!j.contains(key)) return def;
    return j.at(key).get<T>();
}

inline double require_num(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError("config: missing field '" + where + "." + key + "'");
    return j.at(key).get<double>();
}

inline geom::EdgeId parse_edge(const std::string& s) {
    if (s == "left") return geom::EdgeId::left;
    if (s == "right") return geom::EdgeId::right;
    if (s == "bottom") return geom::EdgeId::bottom;
    if (s == "top") return geom::EdgeId::top;
    if (s == "hole") return geom::EdgeId::hole;
    throw ConfigError("config: unknown edge '" + s + "'");
}

inline geom::SegmentKind parse_kind(const std::string& s) {
    if (s == "dirichlet") return geom::SegmentKind::dirichlet;
    if (s == "neumann") return geom::SegmentKind::neumann;
    if (s == "traction_free") return geom::SegmentKind::traction_free;
    if (s == "symmetry_x") return geom::SegmentKind::symmetry_x;
    if (s == "symmetry_y") return geom::SegmentKind::symmetry_y;
    if (s == "free") return geom::SegmentKind::free_edge;
    throw ConfigError("config: unknown segment kind '" + s + "'");
}

inline geom::ValueFn parse_value(const json& j) {
    geom::ValueFn v;
    const std::string kind = get_or<std::string>(j, "kind", "zero");
    if (kind == "zero") v.kind = geom::ValueFn::Kind::zero;
    else if (kind == "const_vec") {
        v.kind = geom::ValueFn::Kind::const_vec;
        auto a = j.at("vec");
        v.vec = {a.at(0).get<double>(), a.at(1).get<double>()};
    } else if (kind == "traction_normal") {
        v.kind = geom::ValueFn::Kind::traction_normal;
        v.amp = require_num(j, "amp", "value");
    } else if (kind == "cyclic_normal") {
        v.kind = geom::ValueFn::Kind::cyclic_normal;
        v.amp = require_num(j, "amp", "value");
        v.period = require_num(j, "period", "value");
    } else if (kind == "radial_pulse") {
        v.kind = geom::ValueFn::Kind::radial_pulse;
        const std::string p = get_or<std::string>(j, "pulse", "gaussian");
        v.pulse = p == "ricker" ? oracle::SourceKind::ricker : oracle::SourceKind::gaussian;
        v.U0 = require_num(j, "U0", "value");
        v.ts = require_num(j, "ts", "value");
        v.tp = require_num(j, "tp", "value");
        v.cx = get_or<double>(j, "cx", 0.0);
        v.cy = get_or<double>(j, "cy", 0.0);
    } else if (kind == "kirsch_traction") {
        v.kind = geom::ValueFn::Kind::kirsch_traction;
        v.kirsch_T = require_num(j, "T", "value");
        v.kirsch_a = require_num(j, "a", "value");
        v.E = require_num(j, "E", "value");
        v.nu = require_num(j, "nu", "value");
    } else {
        throw ConfigError("config: unknown value kind '" + kind + "'");
    }
    return v;
}

inline train::Schedule parse_schedule(const json& j) {
    train::Schedule s;
    if (!j.contains("stages")) throw ConfigError("config: schedule needs 'stages'");
    for (const auto& st : j.at("stages")) {
        train::Stage stage;
        const std::string opt = st.at("opt").get<std::string>();
        if (opt == "adam") {
            stage.kind = train::OptKind::adam;
            stage.learning_rate = require_num(st, "lr", "schedule.stage");
        } else if (opt == "lbfgs") {
            stage.kind = train::OptKind::lbfgs;
            stage.tol_grad = get_or<double>(st, "tol_grad", 1e-8);
            stage.tol_rel_loss = get_or<double>(st, "tol_rel", 1e-12);
            stage.memory = get_or<int>(st, "memory", 10);
        } else {
            throw ConfigError("config: unknown optimizer '" + opt + "'");
        }
        stage.iterations = static_cast<int>(require_num(st, "iters", "schedule.stage"));
        s.stages.push_back(stage);
    }
    return s;
}

inline json schedule_to_json(const train::Schedule& s) {
    json stages = json::array();
    for (const auto& st : s.stages) {
        json o;
        o["opt"] = st.kind == train::OptKind::adam ? "adam" : "lbfgs";
        o["iters"] = st.iterations;
        if (st.kind == train::OptKind::adam) o["lr"] = st.learning_rate;
        else {
            o["tol_grad"] = st.tol_grad;
            o["tol_rel"] = st.tol_rel_loss;
            o["memory"] = st.memory;
        }
        stages.push_back(o);
    }
    return json{{"stages", stages}};
}

}  // namespace detail_cfg

inline ExperimentConfig parse_config_impl(const json& j) {
    using namespace detail_cfg;
    ExperimentConfig c;
    c.name = get_or<std::string>(j, "name", "experiment");
    const json& p = j.at("problem");

    {
        const json& g = p.at("geometry");
        const std::string kind = get_or<std::string>(g, "kind", "rect");
        if (kind == "rect") c.geometry.variant = geom::DomainVariant::rectangle;
        else if (kind == "rect_corner_hole") c.geometry.variant = geom::DomainVariant::rect_corner_hole;
        else if (kind == "rect_center_hole") c.geometry.variant = geom::DomainVariant::rect_center_hole;
        else throw ConfigError("config: unknown geometry kind '" + kind + "'");
        c.geometry.x0 = require_num(g, "x0", "geometry");
        c.geometry.x1 = require_num(g, "x1", "geometry");
        c.geometry.y0 = require_num(g, "y0", "geometry");
        c.geometry.y1 = require_num(g, "y1", "geometry");
        c.geometry.hole_cx = get_or<double>(g, "hole_cx", 0.0);
        c.geometry.hole_cy = get_or<double>(g, "hole_cy", 0.0);
        c.geometry.hole_r = get_or<double>(g, "hole_r", 0.0);
    }
    {
        const json& m = p.at("material");
        c.material.E = require_num(m, "E", "material");
        c.material.nu = require_num(m, "nu", "material");
        c.material.rho = get_or<double>(m, "rho", 0.0);
        const std::string mode = get_or<std::string>(m, "mode", "plane_stress");
        if (mode == "plane_stress") c.material.mode = elast::PlaneMode::stress;
        else if (mode == "plane_strain") c.material.mode = elast::PlaneMode::strain;
        else throw ConfigError("config: unknown material mode '" + mode + "'");
    }
    if (p.contains("time")) {
        c.t0 = get_or<double>(p.at("time"), "t0", 0.0);
        c.t1 = get_or<double>(p.at("time"), "t1", 0.0);
    }
    for (const auto& sj : p.at("segments")) {
        geom::BoundarySegment s;
        s.name = get_or<std::string>(sj, "name", "segment");
        s.edge = parse_edge(sj.at("edge").get<std::string>());
        s.kind = parse_kind(sj.at("kind").get<std::string>());
        s.a0 = require_num(sj, "a0", "segment " + s.name);
        s.a1 = require_num(sj, "a1", "segment " + s.name);
        if (sj.contains("value")) s.value = parse_value(sj.at("value"));
        c.segments.push_back(s);
    }
    {
        const std::string mode = get_or<std::string>(p, "mode", "soft");
        if (mode == "soft") c.mode = IbcMode::soft;
        else if (mode == "hard") c.mode = IbcMode::hard;
        else throw ConfigError("config: unknown enforcement mode '" + mode + "'");
        const std::string form = get_or<std::string>(p, "formulation", "mixed");
        if (form == "mixed") c.formulation = FormulationKind::mixed;
        else if (form == "displacement") c.formulation = FormulationKind::displacement;
        else throw ConfigError("config: unknown formulation '" + form + "'");
        const std::string dist = get_or<std::string>(p, "distance", "analytic");
        if (dist == "analytic") c.distance = DistanceKind::analytic;
        else if (dist == "learned") c.distance = DistanceKind::learned;
        else throw ConfigError("config: unknown distance kind '" + dist + "'");
        c.pin_stress_at_t0 = get_or<bool>(p, "pin_stress_at_t0", false);
        if (p.contains("body_force")) {
            auto a = p.at("body_force");
            c.body_force.f = {a.at(0).get<double>(), a.at(1).get<double>()};
        }
    }
    if (j.contains("networks")) {
        const json& n = j.at("networks");
        auto size_of = [&](const char* key, NetSize def) {
            if (!n.contains(key)) return def;
            return NetSize{static_cast<int>(require_num(n.at(key), "hidden", key)),
                           static_cast<int>(require_num(n.at(key), "width", key))};
        };
        c.net_single = size_of("single", c.net_single);
        c.net_particular = size_of("particular", c.net_particular);
        c.net_distance = size_of("distance", c.net_distance);
        c.net_general = size_of("general", c.net_general);
        c.stress_scale = get_or<double>(n, "stress_scale", 1.0);
        c.disp_scale = get_or<double>(n, "disp_scale", 1.0);
    }
    {
        const json& cc = j.at("collocation");
        c.collocation.interior = static_cast<int>(require_num(cc, "interior", "collocation"));
        if (cc.contains("per_segment"))
            for (const auto& v : cc.at("per_segment"))
                c.collocation.per_segment.push_back(v.get<int>());
        c.collocation.initial = get_or<int>(cc, "initial", 0);
        c.collocation.refine_fraction = get_or<double>(cc, "refine_fraction", 0.0);
        c.collocation.refine_band = get_or<double>(cc, "refine_band", 0.0);
        c.collocation.t0 = c.t0;
        c.collocation.t1 = c.t1;
    }
    if (j.contains("weights")) {
        const json& w = j.at("weights");
        c.weights.lambda_bc = get_or<double>(w, "lambda_bc", 1.0);
        c.weights.lambda_ic = get_or<double>(w, "lambda_ic", 1.0);
        c.weights.extra_traction = get_or<double>(w, "extra_traction", 1.0);
    }
    c.schedule = detail_cfg::parse_schedule(j.at("schedule"));
    if (j.contains("pretrain")) {
        const json& pt = j.at("pretrain");
        if (pt.contains("particular_schedule"))
            c.pretrain.particular_schedule = detail_cfg::parse_schedule(pt.at("particular_schedule"));
        c.pretrain.particular_tolerance = get_or<double>(pt, "particular_tol", 1e-5);
        if (pt.contains("distance_schedule"))
            c.pretrain.distance_schedule = detail_cfg::parse_schedule(pt.at("distance_schedule"));
        c.pretrain.distance_tolerance = get_or<double>(pt, "distance_tol", 1e-4);
        c.pretrain.distance_grid = get_or<int>(pt, "distance_grid", 400);
        c.pretrain.distance_surface = get_or<int>(pt, "distance_surface", 60);
        c.pretrain.distance_t0 = get_or<int>(pt, "distance_t0", 200);
    }
    if (j.contains("eval")) {
        const json& e = j.at("eval");
        if (e.contains("grid")) {
            c.eval.grid_nx = e.at("grid").at(0).get<int>();
            c.eval.grid_ny = e.at("grid").at(1).get<int>();
        }
        if (e.contains("snapshots"))
            for (const auto& v : e.at("snapshots")) c.eval.snapshot_times.push_back(v.get<double>());
    }
    c.seed = get_or<std::uint64_t>(j, "seed", 1);
    c.threads = get_or<int>(j, "threads", 2);
    c.validate();
    return c;
}

inline ExperimentConfig parse_config(const json& j) {
    try {
        return parse_config_impl(j);
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path);
    json j;
    try {
        is >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error in ") + path + ": " + e.what());
    }
    return parse_config(j);
}

/// FNV-1a over the canonical (sorted-key) dump.
inline std::uint64_t config_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) h = (h ^ ch) * 1099511628211ULL;
    return h;
}

}  // namespace pinnelast::cfg
