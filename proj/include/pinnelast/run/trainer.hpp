#pragma once

#include <filesystem>
#include <string>

#include "pinnelast/cfg/config.hpp"
#include "pinnelast/comp/pretrain.hpp"
#include "pinnelast/io/archive.hpp"
#include "pinnelast/oracle/metrics.hpp"
#include "pinnelast/run/batch_loss.hpp"

namespace pinnelast::run {

namespace fs = std::filesystem;
using cfg::ExperimentConfig;
using nlohmann::json;

inline constexpr const char* kVersion = "pinnelast 0.1.0";

/// Everything assembled from a config: point sets, maps, and the model(s).
struct Assembly {
    ExperimentConfig config;
    geom::CollocationSet set;
    geom::HardMapResult hard_map;
    geom::SpaceTimeBox box;
    net::InputAffine in_map;
    net::OutputScaling out_map;
};

inline net::Mlp build_net(const ExperimentConfig& c, cfg::NetSize size, int output_dim,
                          std::uint64_t seed_salt, const net::InputAffine& in_map,
                          const net::OutputScaling& out_map) {
    const int input_dim = c.dynamic() ? 3 : 2;
    net::Mlp mlp = net::Mlp::make(net::LayerSpec{input_dim, output_dim, size.hidden, size.width},
                                  c.seed * 1000003ULL + seed_salt);
    mlp.in_map = in_map;
    mlp.out_map = out_map;
    return mlp;
}

inline Assembly assemble(const ExperimentConfig& c) {
    c.validate();
    Assembly a;
    a.config = c;
    a.box = geom::SpaceTimeBox::of(c.geometry, c.t0, c.t1);
    {
        std::vector<double> lo{c.geometry.x0, c.geometry.y0};
        std::vector<double> hi{c.geometry.x1, c.geometry.y1};
        if (c.dynamic()) {
            lo.push_back(c.t0);
            hi.push_back(c.t1);
        }
        a.in_map = net::InputAffine::to_unit_box(lo, hi);
    }
    for (int ch = 0; ch < 5; ++ch)
        a.out_map.scale[ch] = ch < 2 ? c.disp_scale : c.stress_scale;

    a.hard_map = geom::derive_hard_map(c.geometry, c.segments, c.dynamic(), c.pin_stress_at_t0);
    geom::CollocationConfig cc = c.collocation;
    if (c.mode == cfg::IbcMode::hard) cc.extra_segments = a.hard_map.soft_extra_segments;
    a.set = geom::build_collocation(c.geometry, c.segments, c.initial, cc, c.seed);
    return a;
}

/// Distance-fit samples: Cartesian grid inside the domain plus points on the
/// hole/source circle (times sampled uniformly for dynamic problems).
inline std::vector<comp::DistanceLoss::Sample> distance_samples(
    const ExperimentConfig& c, const geom::ChannelSurfaces& map, const geom::SpaceTimeBox& box) {
    std::vector<comp::DistanceLoss::Sample> out;
    const bool dyn = c.dynamic();
    const int grid = c.pretrain.distance_grid;
    const int per_axis = dyn ? std::max(3, static_cast<int>(std::cbrt(static_cast<double>(grid))))
                             : std::max(3, static_cast<int>(std::sqrt(static_cast<double>(grid))));
    const int nt = dyn ? per_axis : 1;
    for (int i = 0; i < per_axis; ++i)
        for (int j = 0; j < per_axis; ++j)
            for (int k = 0; k < nt; ++k) {
                const double x = c.geometry.x0 +
                                 (c.geometry.x1 - c.geometry.x0) * (i + 0.5) / per_axis;
                const double y = c.geometry.y0 +
                                 (c.geometry.y1 - c.geometry.y0) * (j + 0.5) / per_axis;
                const double t = dyn ? c.t0 + (c.t1 - c.t0) * (k + 0.5) / nt : 0.0;
                if (!c.geometry.inside(x, y)) continue;
                auto d = geom::distance_targets(x, y, t, map, box);
                out.push_back({x, y, t, d});
            }
    if (c.geometry.variant != geom::DomainVariant::rectangle) {
        Rng rng(c.seed ^ 0x9D15ULL);
        for (int k = 0; k < c.pretrain.distance_surface; ++k) {
            const double ang = 2 * M_PI * rng.uniform();
            const double x = c.geometry.hole_cx + c.geometry.hole_r * std::cos(ang);
            const double y = c.geometry.hole_cy + c.geometry.hole_r * std::sin(ang);
            if (x < c.geometry.x0 || x > c.geometry.x1 || y < c.geometry.y0 ||
                y > c.geometry.y1)
                continue;
            const double t = dyn ? c.t0 + (c.t1 - c.t0) * rng.uniform() : 0.0;
            auto d = geom::distance_targets(x, y, t, map, box);
            out.push_back({x, y, t, d});
        }
    }
    return out;
}

struct TrainOutcome {
    bool hard = false;
    net::Mlp model;                // soft single network
    comp::CompositeModel composite;
    train::TrainReport report;     // main training stage
    double j_part = 0, j_dist = 0;
    train::LossBreakdown final_parts;
};

/// Full training pipeline for one experiment. In hard mode: pre-train the
/// particular solution (and the distance network when learned), freeze both,
/// then train the general network on the equation residuals.
inline TrainOutcome train_experiment(const Assembly& a) {
    const ExperimentConfig& c = a.config;
    TrainOutcome out;
    out.hard = c.mode == cfg::IbcMode::hard;

    if (!out.hard) {
        const int channels = c.formulation == cfg::FormulationKind::mixed ? 5 : 2;
        out.model = build_net(c, c.net_single, channels, 11, a.in_map,
                              channels == 5 ? a.out_map : net::OutputScaling{});
        BatchedPinnLoss::Config lc;
        lc.form = c.formulation == cfg::FormulationKind::mixed
                      ? Formulation::mixed_soft
                      : Formulation::pure_displacement_soft;
        lc.material = c.material;
        lc.body = c.body_force;
        lc.weights = c.weights;
        lc.dynamic = c.dynamic();
        lc.threads = c.threads;
        ProblemSets sets{a.set.interior, a.set.boundary, a.set.extra, a.set.initial};
        BatchedPinnLoss loss(out.model, lc, sets);
        out.report = train::run_schedule(loss, out.model.params.flat, c.schedule, 10);
        out.final_parts = out.report.final_breakdown;
        return out;
    }

    comp::CompositeModel& cm = out.composite;
    cm.particular = build_net(c, c.net_particular, 5, 21, a.in_map, a.out_map);
    cm.general = build_net(c, c.net_general, 5, 23, a.in_map, a.out_map);
    cm.analytic_distance = c.distance == cfg::DistanceKind::analytic;
    cm.dist.box = a.box;
    cm.dist.map = a.hard_map.map;
    if (cm.analytic_distance) {
        cm.dist.calibrate(c.geometry);
        cm.distance_frozen = true;
        out.j_dist = 0;
    }

    // particular solution on the boundary/initial values
    {
        ProblemSets ibc;
        ibc.boundary = a.set.boundary;
        ibc.initial = a.set.initial;
        auto res = comp::pretrain_particular(cm, ibc, c.material, c.dynamic(),
                                             c.pretrain.particular_schedule,
                                             c.pretrain.particular_tolerance, c.threads);
        out.j_part = res.final_loss;
    }
    if (!cm.analytic_distance) {
        cm.distance_net = build_net(c, c.net_distance, 5, 22, a.in_map, net::OutputScaling{});
        auto samples = distance_samples(c, a.hard_map.map, a.box);
        std::vector<std::array<double, 2>> t0pts;
        if (c.dynamic()) {
            Rng rng(c.seed ^ 0x7711ULL);
            for (int i = 0; i < c.pretrain.distance_t0; ++i) {
                const double x = rng.uniform(c.geometry.x0, c.geometry.x1);
                const double y = rng.uniform(c.geometry.y0, c.geometry.y1);
                if (c.geometry.inside(x, y)) t0pts.push_back({x, y});
            }
        }
        auto res = comp::pretrain_distance(cm, std::move(samples), std::move(t0pts),
                                           c.dynamic(), c.pretrain.distance_schedule,
                                           c.pretrain.distance_tolerance);
        out.j_dist = res.final_loss;
    }

    ProblemSets sets;
    sets.interior = a.set.interior;
    sets.extra = a.set.extra;
    out.report = comp::hard_train(cm, sets, c.material, c.weights, c.dynamic(), c.schedule,
                                  c.threads, 10);
    out.final_parts = out.report.final_breakdown;
    return out;
}

// --- field evaluation -----------------------------------------------------------

inline std::array<double, 5> model_values(const TrainOutcome& out, double x, double y,
                                          double t, bool dynamic) {
    std::array<double, 3> in{x, y, t};
    const int d = dynamic ? 3 : 2;
    if (out.hard)
        return comp::synergy_eval<double>(out.composite, std::span<const double>(in.data(), d));
    std::array<double, 5> r{};
    auto v = net::eval_plain(out.model, std::span<const double>(in.data(), d));
    for (std::size_t i = 0; i < v.size(); ++i) r[i] = v[i];
    return r;
}

/// Evaluates the model over a grid (restricted to the domain) at the given
/// times and emits the standard archive with a von Mises column.
inline io::FieldArchive evaluate_grid(const TrainOutcome& out, const ExperimentConfig& c,
                                      int nx, int ny, std::vector<double> times) {
    if (times.empty()) times = {0.0};
    io::FieldArchive a;
    a.columns = io::FieldArchive::standard_columns(true);
    for (double t : times)
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                const double x =
                    c.geometry.x0 + (c.geometry.x1 - c.geometry.x0) * (i + 0.5) / nx;
                const double y =
                    c.geometry.y0 + (c.geometry.y1 - c.geometry.y0) * (j + 0.5) / ny;
                if (!c.geometry.inside(x, y)) continue;
                const auto v = model_values(out, x, y, t, c.dynamic());
                const double svm =
                    elast::von_mises(v[2], v[3], v[4], c.material.mode, c.material.nu);
                for (double val : {x, y, t, v[0], v[1], v[2], v[3], v[4], svm})
                    a.data.push_back(val);
            }
    return a;
}

inline io::FieldArchive evaluate_points(const TrainOutcome& out, const ExperimentConfig& c,
                                        std::span<const std::array<double, 3>> pts) {
    io::FieldArchive a;
    a.columns = io::FieldArchive::standard_columns(true);
    for (const auto& p : pts) {
        const auto v = model_values(out, p[0], p[1], p[2], c.dynamic());
        const double svm = elast::von_mises(v[2], v[3], v[4], c.material.mode, c.material.nu);
        for (double val : {p[0], p[1], p[2], v[0], v[1], v[2], v[3], v[4], svm})
            a.data.push_back(val);
    }
    return a;
}

// --- archive comparison ------------------------------------------------------------

struct CompareReport {
    double e_u = 0;   // relative l2 of the displacement vector
    double e_sv = 0;  // relative l2 of the von Mises stress
    std::size_t stations = 0;
};

inline CompareReport compare_archives(const io::FieldArchive& pred,
                                      const io::FieldArchive& ref, elast::PlaneMode mode,
                                      double nu) {
    if (pred.rows() != ref.rows())
        throw io::ArchiveError("compare: archives have different station counts");
    auto col = [&](const io::FieldArchive& a, const char* n) {
        const int i = a.column_index(n);
        if (i < 0) throw io::ArchiveError(std::string("compare: missing column ") + n);
        return i;
    };
    const int px = col(pred, "x"), py = col(pred, "y"), pt = col(pred, "t");
    const int rx = col(ref, "x"), ry = col(ref, "y"), rt = col(ref, "t");
    std::vector<double> pu, ru, psv, rsv;
    for (std::size_t r = 0; r < pred.rows(); ++r) {
        const double ddx = pred.at(r, px) - ref.at(r, rx);
        const double ddy = pred.at(r, py) - ref.at(r, ry);
        const double ddt = pred.at(r, pt) - ref.at(r, rt);
        if (std::abs(ddx) > 1e-9 || std::abs(ddy) > 1e-9 || std::abs(ddt) > 1e-9) {
            std::ostringstream os;
            os << "compare: station mismatch at row " << r << ": (" << pred.at(r, px) << ", "
               << pred.at(r, py) << ", " << pred.at(r, pt) << ") vs (" << ref.at(r, rx) << ", "
               << ref.at(r, ry) << ", " << ref.at(r, rt) << ")";
            throw io::ArchiveError(os.str());
        }
        auto fetch = [&](const io::FieldArchive& a, std::size_t row, const char* n) {
            return a.at(row, static_cast<std::size_t>(col(a, n)));
        };
        pu.push_back(fetch(pred, r, "u"));
        pu.push_back(fetch(pred, r, "v"));
        ru.push_back(fetch(ref, r, "u"));
        ru.push_back(fetch(ref, r, "v"));
        auto svm_of = [&](const io::FieldArchive& a, std::size_t row) {
            if (a.column_index("svm") >= 0) return fetch(a, row, "svm");
            return elast::von_mises(fetch(a, row, "s11"), fetch(a, row, "s22"),
                                    fetch(a, row, "s12"), mode, nu);
        };
        psv.push_back(svm_of(pred, r));
        rsv.push_back(svm_of(ref, r));
    }
    CompareReport rep;
    rep.e_u = oracle::relative_l2(pu, ru);
    rep.e_sv = oracle::relative_l2(psv, rsv);
    rep.stations = pred.rows();
    return rep;
}

// --- manifests -----------------------------------------------------------------

inline void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        os << content;
        if (!os) throw io::ArchiveError("write failure: " + tmp);
    }
    fs::rename(tmp, path);
}

inline json make_manifest(const json& config_json, const ExperimentConfig& c,
                          const TrainOutcome& out, const Assembly& a) {
    json m;
    m["version"] = kVersion;
    m["config"] = config_json;
    m["config_hash"] = cfg::config_hash(config_json);
    m["seed"] = c.seed;
    m["threads"] = c.threads;
    json dec;
    dec["input_normalization"] = {{"scale", a.in_map.scale}, {"shift", a.in_map.shift}};
    dec["output_scaling"] = {{"scale", a.out_map.scale}, {"shift", a.out_map.shift}};
    dec["rho"] = c.material.rho;
    dec["weights"] = {{"lambda_bc", c.weights.lambda_bc},
                      {"lambda_ic", c.weights.lambda_ic},
                      {"extra_traction", c.weights.extra_traction}};
    dec["distance_mode"] = c.distance == cfg::DistanceKind::analytic ? "analytic" : "learned";
    m["decisions"] = dec;
    m["final"] = {{"jp", out.report.final_loss},
                  {"jg", out.final_parts.jg},
                  {"jbc", out.final_parts.jbc},
                  {"jic", out.final_parts.jic},
                  {"j_part", out.j_part},
                  {"j_dist", out.j_dist},
                  {"wall_seconds", out.report.wall_seconds},
                  {"aborted", out.report.aborted},
                  {"lbfgs_status", train::to_string(out.report.lbfgs_status)}};
    return m;
}

/// Runs the whole pipeline and persists checkpoints, trace and manifest.
inline TrainOutcome run_and_persist(const json& config_json, const std::string& outdir) {
    const ExperimentConfig c = cfg::parse_config(config_json);
    fs::create_directories(outdir);
    Assembly a = assemble(c);
    TrainOutcome out = train_experiment(a);
    train::write_trace(outdir + "/trace.log", out.report);
    json manifest = make_manifest(config_json, c, out, a);
    if (out.hard) {
        comp::save_composite(outdir, out.composite);
        manifest["checkpoints"] = {
            {"particular", {{"path", "particular.ckpt"},
                            {"hash", net::file_hash(outdir + "/particular.ckpt")}}},
            {"general",
             {{"path", "general.ckpt"}, {"hash", net::file_hash(outdir + "/general.ckpt")}}}};
        if (!out.composite.analytic_distance)
            manifest["checkpoints"]["distance"] = {
                {"path", "distance.ckpt"}, {"hash", net::file_hash(outdir + "/distance.ckpt")}};
    } else {
        net::save_checkpoint(outdir + "/model.ckpt", out.model, net::NetRole::single, false);
        manifest["checkpoints"] = {
            {"model", {{"path", "model.ckpt"}, {"hash", net::file_hash(outdir + "/model.ckpt")}}}};
    }
    write_text_atomic(outdir + "/manifest.json", manifest.dump(2) + "\n");
    return out;
}

// --- capacity sweep -----------------------------------------------------------------

struct SweepRow {
    int hidden = 0, width = 0;
    double jp = 0, e_u = 0, e_sv = 0;
    bool failed = false;
    std::string error;
};

/// Reference row of the published convergence study on the defected plate
/// (final loss and relative errors per general-net capacity, FE-referenced).
/// The sweep harness prints these next to fresh results for orientation.
struct ConvergenceTarget {
    int hidden, width;
    double jp, e_u, e_sv;
};

inline const std::vector<ConvergenceTarget>& convergence_reference_rows() {
    static const std::vector<ConvergenceTarget> rows{
        {4, 30, 1.4e-4, 4.1e-2, 2.6e-2}, {4, 40, 9.8e-5, 4.0e-2, 2.6e-2},
        {5, 40, 7.7e-5, 3.7e-2, 2.3e-2}, {5, 50, 4.3e-5, 3.1e-2, 1.5e-2},
        {6, 50, 1.4e-5, 2.0e-2, 4.1e-3}, {6, 60, 1.3e-5, 1.9e-2, 3.4e-3},
    };
    return rows;
}

/// Trains a list of general-network capacities against a fixed reference
/// archive; the particular/distance factors are pre-trained once and reused.
inline std::vector<SweepRow> run_sweep(const ExperimentConfig& base,
                                       const std::vector<cfg::NetSize>& capacities,
                                       const io::FieldArchive& reference,
                                       const std::vector<std::array<double, 3>>& stations) {
    if (base.mode != cfg::IbcMode::hard)
        throw cfg::ConfigError("sweep: the capacity sweep drives the hard-mode general net");
    Assembly a = assemble(base);
    // shared pre-training
    ExperimentConfig probe = base;
    probe.net_general = capacities.front();
    Assembly pa = assemble(probe);
    TrainOutcome shared;
    {
        comp::CompositeModel& cm = shared.composite;
        cm.particular = build_net(base, base.net_particular, 5, 21, pa.in_map, pa.out_map);
        cm.analytic_distance = base.distance == cfg::DistanceKind::analytic;
        cm.dist.box = pa.box;
        cm.dist.map = pa.hard_map.map;
        if (cm.analytic_distance) {
            cm.dist.calibrate(base.geometry);
            cm.distance_frozen = true;
        }
        ProblemSets ibc;
        ibc.boundary = pa.set.boundary;
        ibc.initial = pa.set.initial;
        comp::pretrain_particular(cm, ibc, base.material, base.dynamic(),
                                  base.pretrain.particular_schedule,
                                  base.pretrain.particular_tolerance, base.threads);
        if (!cm.analytic_distance) {
            cm.distance_net = build_net(base, base.net_distance, 5, 22, pa.in_map,
                                        net::OutputScaling{});
            auto samples = distance_samples(base, pa.hard_map.map, pa.box);
            comp::pretrain_distance(cm, std::move(samples), {}, base.dynamic(),
                                    base.pretrain.distance_schedule,
                                    base.pretrain.distance_tolerance);
        }
    }

    std::vector<SweepRow> rows;
    for (const auto& cap : capacities) {
        SweepRow row;
        row.hidden = cap.hidden;
        row.width = cap.width;
        try {
            TrainOutcome out;
            out.hard = true;
            out.composite = shared.composite;
            out.composite.general = build_net(base, cap, 5, 23, pa.in_map, pa.out_map);
            ProblemSets sets;
            sets.interior = pa.set.interior;
            sets.extra = pa.set.extra;
            out.report = comp::hard_train(out.composite, sets, base.material, base.weights,
                                          base.dynamic(), base.schedule, base.threads, 50);
            row.jp = out.report.final_loss;
            auto pred = evaluate_points(out, base, stations);
            auto rep = compare_archives(pred, reference, base.material.mode, base.material.nu);
            row.e_u = rep.e_u;
            row.e_sv = rep.e_sv;
        } catch (const std::exception& e) {
            row.failed = true;
            row.error = e.what();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace pinnelast::run
