// Command-line front end: training, evaluation, comparison, capacity sweeps,
// reference-solution generation, and preset management.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "pinnelast/cfg/presets.hpp"
#include "pinnelast/oracle/fdm.hpp"
#include "pinnelast/run/trainer.hpp"

namespace fs = std::filesystem;
using namespace pinnelast;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitConvergence = 3;
constexpr int kExitNumerical = 4;

json resolve_config(const std::string& config_path, const std::string& preset_name,
                    std::uint64_t seed_override, int threads_override) {
    json j;
    if (!preset_name.empty()) j = cfg::preset(preset_name);
    else if (!config_path.empty()) {
        std::ifstream is(config_path);
        if (!is) throw cfg::ConfigError("cannot open config: " + config_path);
        is >> j;
    } else {
        throw cfg::ConfigError("either --config or --preset is required");
    }
    if (seed_override != 0) j["seed"] = seed_override;
    if (threads_override > 0) j["threads"] = threads_override;
    return j;
}

run::TrainOutcome load_models(const std::string& ckpt_dir, const cfg::ExperimentConfig& c) {
    run::TrainOutcome out;
    const fs::path dir(ckpt_dir);
    if (fs::exists(dir / "general.ckpt")) {
        out.hard = true;
        auto p = net::load_checkpoint((dir / "particular.ckpt").string());
        auto g = net::load_checkpoint((dir / "general.ckpt").string());
        out.composite.particular = p.net;
        out.composite.general = g.net;
        out.composite.particular_frozen = p.frozen;
        if (fs::exists(dir / "distance.ckpt")) {
            auto d = net::load_checkpoint((dir / "distance.ckpt").string());
            out.composite.analytic_distance = false;
            out.composite.distance_net = d.net;
            out.composite.distance_frozen = d.frozen;
        } else {
            out.composite.analytic_distance = true;
            auto hm = geom::derive_hard_map(c.geometry, c.segments, c.dynamic(),
                                            c.pin_stress_at_t0);
            out.composite.dist.box = geom::SpaceTimeBox::of(c.geometry, c.t0, c.t1);
            out.composite.dist.map = hm.map;
            out.composite.dist.calibrate(c.geometry);
        }
        const int want_in = c.dynamic() ? 3 : 2;
        if (g.net.spec.input_dim != want_in)
            throw net::CheckpointError(
                "checkpoint incompatible with config: general net expects input_dim " +
                std::to_string(g.net.spec.input_dim) + ", problem needs " +
                std::to_string(want_in));
    } else if (fs::exists(dir / "model.ckpt") || fs::is_regular_file(dir)) {
        const std::string path =
            fs::is_regular_file(dir) ? ckpt_dir : (dir / "model.ckpt").string();
        auto m = net::load_checkpoint(path);
        out.hard = false;
        out.model = m.net;
        const int want_in = c.dynamic() ? 3 : 2;
        if (m.net.spec.input_dim != want_in)
            throw net::CheckpointError(
                "checkpoint incompatible with config: model expects input_dim " +
                std::to_string(m.net.spec.input_dim) + ", problem needs " +
                std::to_string(want_in));
    } else {
        throw net::CheckpointError("no checkpoint found under " + ckpt_dir);
    }
    return out;
}

std::vector<std::array<double, 3>> stations_from_file(const std::string& path) {
    auto a = io::read_archive(path);
    const int cx = a.column_index("x"), cy = a.column_index("y"), ct = a.column_index("t");
    if (cx < 0 || cy < 0) throw io::ArchiveError("stations file needs x and y columns");
    std::vector<std::array<double, 3>> pts;
    for (std::size_t r = 0; r < a.rows(); ++r)
        pts.push_back({a.at(r, cx), a.at(r, cy), ct >= 0 ? a.at(r, ct) : 0.0});
    return pts;
}

void write_archive_auto(const std::string& path, const io::FieldArchive& a) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".blk") io::write_block(path, a);
    else io::write_csv(path, a);
}

int cmd_train(const json& config_json, const std::string& outdir) {
    const auto c = cfg::parse_config(config_json);
    std::cout << "training '" << c.name << "' -> " << outdir << "\n";
    auto out = run::run_and_persist(config_json, outdir);
    std::cout << "final J_p " << out.report.final_loss << " (J_g " << out.final_parts.jg
              << ", J_bc " << out.final_parts.jbc << ", J_ic " << out.final_parts.jic << ")\n";
    if (out.hard)
        std::cout << "pretraining: J_part " << out.j_part << ", J_dist " << out.j_dist << "\n";
    std::cout << "wall " << out.report.wall_seconds << " s, optimizer: "
              << train::to_string(out.report.lbfgs_status) << "\n";
    if (out.report.aborted) {
        std::cerr << "numerical abort: " << out.report.abort_message << "\n";
        return kExitNumerical;
    }
    const bool converged = out.report.lbfgs_status == train::LbfgsStatus::converged_gradient ||
                           out.report.lbfgs_status == train::LbfgsStatus::converged_loss_change ||
                           out.report.lbfgs_status == train::LbfgsStatus::already_minimized ||
                           out.report.lbfgs_status == train::LbfgsStatus::budget_exhausted;
    return converged ? kExitOk : kExitConvergence;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"physics-informed solver for 2D elastodynamics"};
    app.require_subcommand(1);

    std::string config_path, preset_name, outdir, ckpt, pred_path, ref_path, stations_path,
        out_path, capacities, oracle_kind;
    std::uint64_t seed = 0;
    int threads = 0, grid_nx = 60, grid_ny = 60;
    std::vector<double> times;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "experiment config (json)");
        sub->add_option("--preset", preset_name, "built-in preset name");
        sub->add_option("--seed", seed, "seed override");
        sub->add_option("--threads", threads, "worker thread override");
    };

    auto* train_cmd = app.add_subcommand("train", "run the full training pipeline");
    add_common(train_cmd);
    train_cmd->add_option("--out", outdir, "output directory")->required();

    auto* pretrain_cmd =
        app.add_subcommand("pretrain", "pre-train the particular/distance networks only");
    add_common(pretrain_cmd);
    pretrain_cmd->add_option("--out", outdir, "output directory")->required();

    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a grid or stations");
    add_common(eval_cmd);
    eval_cmd->add_option("--checkpoint", ckpt, "checkpoint directory (or model file)")
        ->required();
    eval_cmd->add_option("--out", out_path, "output archive (.csv or .blk)")->required();
    eval_cmd->add_option("--grid", grid_nx, "grid columns");
    eval_cmd->add_option("--grid-y", grid_ny, "grid rows");
    eval_cmd->add_option("--stations", stations_path, "station list file (csv/blk with x,y,t)");
    eval_cmd->add_option("--times", times, "evaluation times (dynamic problems)");

    auto* compare_cmd = app.add_subcommand("compare", "relative l2 metrics between archives");
    compare_cmd->add_option("--pred", pred_path, "prediction archive")->required();
    compare_cmd->add_option("--ref", ref_path, "reference archive")->required();
    add_common(compare_cmd);
    compare_cmd->add_option("--out", out_path, "metric report (json)");

    auto* sweep_cmd = app.add_subcommand("sweep", "capacity sweep of the general network");
    add_common(sweep_cmd);
    sweep_cmd->add_option("--capacities", capacities, "list like 4x30,5x40,6x50")->required();
    sweep_cmd->add_option("--ref", ref_path, "reference archive for the error metrics")
        ->required();
    sweep_cmd->add_option("--out", outdir, "output directory")->required();

    auto* oracle_cmd = app.add_subcommand("oracle", "generate reference solutions");
    oracle_cmd->add_option("--kind", oracle_kind, "kirsch | uniaxial | fdm")->required();
    oracle_cmd->add_option("--config", config_path, "oracle settings (json)");
    oracle_cmd->add_option("--out", out_path, "output archive")->required();

    auto* preset_cmd = app.add_subcommand("preset", "list or export the shipped presets");
    std::string dump_dir, show_name;
    preset_cmd->add_option("--dump", dump_dir, "write every preset to this directory");
    preset_cmd->add_option("--show", show_name, "print one preset");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train_cmd) {
            return cmd_train(resolve_config(config_path, preset_name, seed, threads), outdir);
        }
        if (*pretrain_cmd) {
            json j = resolve_config(config_path, preset_name, seed, threads);
            auto c = cfg::parse_config(j);
            if (c.mode != cfg::IbcMode::hard)
                throw cfg::ConfigError("pretrain: config must use hard enforcement");
            // run only the pre-training stages
            j["schedule"] = json{{"stages", json::array({json{{"opt", "lbfgs"}, {"iters", 0}}})}};
            auto out = run::run_and_persist(j, outdir);
            std::cout << "J_part " << out.j_part << ", J_dist " << out.j_dist << "\n";
            return kExitOk;
        }
        if (*eval_cmd) {
            json j = resolve_config(config_path, preset_name, seed, threads);
            auto c = cfg::parse_config(j);
            auto models = load_models(ckpt, c);
            io::FieldArchive a;
            if (!stations_path.empty()) {
                auto pts = stations_from_file(stations_path);
                a = run::evaluate_points(models, c, pts);
            } else {
                a = run::evaluate_grid(models, c, grid_nx, grid_ny,
                                       times.empty() ? c.eval.snapshot_times : times);
            }
            write_archive_auto(out_path, a);
            std::cout << "wrote " << a.rows() << " stations to " << out_path << "\n";
            return kExitOk;
        }
        if (*compare_cmd) {
            auto pred = io::read_archive(pred_path);
            auto ref = io::read_archive(ref_path);
            elast::PlaneMode mode = elast::PlaneMode::stress;
            double nu = 0.3;
            if (!config_path.empty() || !preset_name.empty()) {
                auto c = cfg::parse_config(resolve_config(config_path, preset_name, 0, 0));
                mode = c.material.mode;
                nu = c.material.nu;
            }
            auto rep = run::compare_archives(pred, ref, mode, nu);
            std::cout << "stations " << rep.stations << "\nE(u)  " << rep.e_u << "\nE(sv) "
                      << rep.e_sv << "\n";
            if (!out_path.empty()) {
                json r{{"stations", rep.stations}, {"e_u", rep.e_u}, {"e_sv", rep.e_sv}};
                run::write_text_atomic(out_path, r.dump(2) + "\n");
            }
            return kExitOk;
        }
        if (*sweep_cmd) {
            json j = resolve_config(config_path, preset_name, seed, threads);
            auto base = cfg::parse_config(j);
            std::vector<cfg::NetSize> caps;
            std::stringstream ss(capacities);
            std::string tok;
            while (std::getline(ss, tok, ',')) {
                const auto pos = tok.find('x');
                if (pos == std::string::npos)
                    throw cfg::ConfigError("capacity entries look like 5x40");
                caps.push_back(
                    {std::stoi(tok.substr(0, pos)), std::stoi(tok.substr(pos + 1))});
            }
            auto ref = io::read_archive(ref_path);
            const int cx = ref.column_index("x"), cy = ref.column_index("y"),
                      ct = ref.column_index("t");
            std::vector<std::array<double, 3>> stations;
            for (std::size_t r = 0; r < ref.rows(); ++r)
                stations.push_back(
                    {ref.at(r, cx), ref.at(r, cy), ct >= 0 ? ref.at(r, ct) : 0.0});
            auto rows = run::run_sweep(base, caps, ref, stations);
            fs::create_directories(outdir);
            std::ostringstream table;
            table << "# depth x width   J_p          E(u)         E(sv)"
                     "      [reference J_p/E(u)/E(sv), FE-referenced study]\n";
            bool monotone = true;
            double prev_jp = 1e300, prev_esv = 1e300;
            for (const auto& r : rows) {
                if (r.failed) {
                    table << r.hidden << "x" << r.width << "  FAILED: " << r.error << "\n";
                    continue;
                }
                table << r.hidden << "x" << r.width << "  " << r.jp << "  " << r.e_u << "  "
                      << r.e_sv;
                for (const auto& t : run::convergence_reference_rows())
                    if (t.hidden == r.hidden && t.width == r.width)
                        table << "   [" << t.jp << " / " << t.e_u << " / " << t.e_sv << "]";
                table << "\n";
                monotone = monotone && r.jp <= prev_jp * (1 + 1e-12) &&
                           r.e_sv <= prev_esv * (1 + 1e-12);
                prev_jp = r.jp;
                prev_esv = r.e_sv;
            }
            table << "# monotone with capacity: " << (monotone ? "pass" : "warn") << "\n";
            std::cout << table.str();
            run::write_text_atomic(outdir + "/sweep.txt", table.str());
            return kExitOk;
        }
        if (*oracle_cmd) {
            json j = json::object();
            if (!config_path.empty()) {
                std::ifstream is(config_path);
                if (!is) throw cfg::ConfigError("cannot open oracle config: " + config_path);
                is >> j;
            }
            if (oracle_kind == "kirsch" || oracle_kind == "uniaxial") {
                const double T = j.value("T", 1.0), a_hole = j.value("a", 0.1);
                const double E = j.value("E", 20.0), nu = j.value("nu", 0.25);
                const double x0 = j.value("x0", 0.0), x1 = j.value("x1", 0.5);
                const double y0 = j.value("y0", 0.0), y1 = j.value("y1", 0.5);
                const int nx = j.value("nx", 60), ny = j.value("ny", 60);
                io::FieldArchive a;
                a.columns = io::FieldArchive::standard_columns(false);
                for (int i = 0; i < nx; ++i)
                    for (int jj = 0; jj < ny; ++jj) {
                        const double x = x0 + (x1 - x0) * (i + 0.5) / nx;
                        const double y = y0 + (y1 - y0) * (jj + 0.5) / ny;
                        oracle::FieldState f;
                        if (oracle_kind == "kirsch") {
                            if (std::hypot(x, y) < a_hole) continue;
                            f = oracle::kirsch_fields(x, y, T, a_hole, E, nu);
                        } else {
                            f = oracle::uniaxial_fields(x, y, T, E, nu);
                        }
                        for (double v : {x, y, 0.0, f.u, f.v, f.s11, f.s22, f.s12})
                            a.data.push_back(v);
                    }
                write_archive_auto(out_path, a);
                std::cout << "wrote " << a.rows() << " stations\n";
                return kExitOk;
            }
            if (oracle_kind == "fdm") {
                oracle::FdmElastodynamics::Config fc;
                fc.x0 = j.at("x0").get<double>();
                fc.x1 = j.at("x1").get<double>();
                fc.y0 = j.at("y0").get<double>();
                fc.y1 = j.at("y1").get<double>();
                fc.nx = j.value("cells", 200);
                fc.ny = fc.nx;
                fc.duration = j.at("duration").get<double>();
                fc.material.E = j.at("E").get<double>();
                fc.material.nu = j.at("nu").get<double>();
                fc.material.rho = j.at("rho").get<double>();
                fc.material.mode = j.value("mode", std::string("plane_strain")) == "plane_stress"
                                       ? elast::PlaneMode::stress
                                       : elast::PlaneMode::strain;
                if (j.contains("source")) {
                    const auto& s = j.at("source");
                    fc.src_cx = s.value("cx", 0.0);
                    fc.src_cy = s.value("cy", 0.0);
                    fc.src_r = s.at("r").get<double>();
                    fc.src_kind = s.value("pulse", std::string("gaussian")) == "ricker"
                                      ? oracle::SourceKind::ricker
                                      : oracle::SourceKind::gaussian;
                    fc.U0 = s.at("U0").get<double>();
                    fc.ts = s.at("ts").get<double>();
                    fc.tp = s.at("tp").get<double>();
                }
                auto edge_of = [&](const std::string& s) {
                    if (s == "fixed") return oracle::EdgeCondition::fixed;
                    if (s == "free") return oracle::EdgeCondition::free_surface;
                    return oracle::EdgeCondition::truncation;
                };
                if (j.contains("edges")) {
                    const auto& e = j.at("edges");
                    for (int k = 0; k < 4; ++k) fc.edges[k] = edge_of(e.at(k).get<std::string>());
                }
                std::vector<double> snaps = j.at("snapshots").get<std::vector<double>>();
                oracle::FdmElastodynamics solver(fc);
                io::FieldArchive a;
                a.columns = io::FieldArchive::standard_columns(false);
                solver.run(snaps, [&](const oracle::FdmElastodynamics::Snapshot& s) {
                    for (int i = 0; i < s.nx; ++i)
                        for (int jj = 0; jj < s.ny; ++jj) {
                            const double x = solver.node_x(i), y = solver.node_y(jj);
                            const int idx = i * s.ny + jj;
                            for (double v : {x, y, s.t, s.u[idx], s.v[idx], s.sxx[idx],
                                             s.syy[idx], s.sxy[idx]})
                                a.data.push_back(v);
                        }
                });
                write_archive_auto(out_path, a);
                std::cout << "wrote " << a.rows() << " stations\n";
                return kExitOk;
            }
            throw cfg::ConfigError("unknown oracle kind '" + oracle_kind + "'");
        }
        if (*preset_cmd) {
            auto reg = cfg::preset_registry();
            if (!show_name.empty()) {
                std::cout << cfg::preset(show_name).dump(2) << "\n";
            } else if (!dump_dir.empty()) {
                fs::create_directories(dump_dir);
                for (const auto& [name, j] : reg)
                    run::write_text_atomic(dump_dir + "/" + name + ".json", j.dump(2) + "\n");
                std::cout << "wrote " << reg.size() << " presets to " << dump_dir << "\n";
            } else {
                for (const auto& [name, j] : reg) std::cout << name << "\n";
            }
            return kExitOk;
        }
    } catch (const cfg::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const geom::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const net::CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const io::ArchiveError& e) {
        std::cerr << "archive error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const comp::TrainingFailure& e) {
        std::cerr << "convergence failure: " << e.what() << "\n";
        return kExitConvergence;
    } catch (const train::NumericalAbort& e) {
        std::cerr << "numerical abort: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
