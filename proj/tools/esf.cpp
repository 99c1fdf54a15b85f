// Command-line front end: ingestion, pipeline runs, synthesis, sweeps,
// cost reports, oracle fuzzing, and flow-field rendering.

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "esf/evalbench.hpp"
#include "esf/events.hpp"
#include "esf/pipeline2d.hpp"
#include "esf/synth.hpp"

namespace {

using namespace esf;

struct CommonFlags {
    int nx = 240, ny = 180;
    std::uint64_t dt_us = 0;
    std::uint32_t theta_e = 0;
    int depth = 16, j_max = 15, beta = 4;
    int theta_s = -1;
    double theta_s_frac = -1;
    std::string mode = "raw";
    std::string variant = "trace";
    bool adapt = false;
    double rho_lo = 0.10, rho_hi = 0.40;
    std::uint64_t dt_min_us = 1000, dt_max_us = 200000;
    int hold_bins = -1;
    bool no_y = false;
    bool legacy_trace = false;
    bool audit = false;
    bool preset = false;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--nx", f.nx, "sensor width in pixels (N_x)");
    cmd->add_option("--ny", f.ny, "sensor height in pixels (N_y)");
    cmd->add_option("--dt-us", f.dt_us, "time bin duration in us (Delta t)");
    cmd->add_option("--theta-e", f.theta_e, "event count threshold (theta_e)");
    cmd->add_option("--L", f.depth, "temporal depth, grid columns (L)");
    cmd->add_option("--J", f.j_max, "max hypothesis magnitude (J)");
    cmd->add_option("--beta", f.beta, "minimum in-bounds steps (beta)");
    cmd->add_option("--theta-s", f.theta_s, "score threshold in raw units (theta_s)");
    cmd->add_option("--theta-s-frac", f.theta_s_frac,
                    "score threshold as a fraction of L (theta_s = round(frac*L); "
                    "default 0.3 when neither flag is given)");
    cmd->add_option("--mode", f.mode, "scorer mode: raw | normalized");
    cmd->add_option("--variant", f.variant, "scorer variant: trace | incremental");
    cmd->add_flag("--adapt", f.adapt, "enable density-feedback bin adaptation");
    cmd->add_option("--rho-lo", f.rho_lo, "density band lower bound");
    cmd->add_option("--rho-hi", f.rho_hi, "density band upper bound");
    cmd->add_option("--dt-min-us", f.dt_min_us, "adaptation clamp: minimum Delta t");
    cmd->add_option("--dt-max-us", f.dt_max_us, "adaptation clamp: maximum Delta t");
    cmd->add_option("--hold-bins", f.hold_bins,
                    "adaptation hold period in bins (default: L)");
    cmd->add_flag("--no-y", f.no_y, "disable the y pipeline");
    cmd->add_flag("--legacy-trace", f.legacy_trace,
                  "use the literal h=1..L trace indexing (comparison only)");
    cmd->add_flag("--audit", f.audit, "enable datapath bit-width assertions");
    cmd->add_flag("--preset", f.preset,
                  "load typical parameter values (dt=40000, theta_e=80, L=16, J=15, "
                  "beta=4, theta_s=0.3L)");
}

PipelineConfig make_config(CommonFlags f) {
    if (f.preset) {
        if (f.dt_us == 0) f.dt_us = 40000;
        if (f.theta_e == 0) f.theta_e = 80;
        if (f.theta_s < 0 && f.theta_s_frac < 0) f.theta_s_frac = 0.3;
    }
    if (f.dt_us == 0)
        throw CLI::ValidationError("--dt-us is required (no implicit default; "
                                   "use --preset for typical values)");
    if (f.theta_e == 0)
        throw CLI::ValidationError("--theta-e is required (no implicit default)");
    if (f.theta_s < 0 && f.theta_s_frac < 0) f.theta_s_frac = 0.3;
    if (f.theta_s_frac >= 0) f.theta_s = static_cast<int>(std::lround(f.theta_s_frac * f.depth));

    PipelineConfig cfg;
    cfg.geom = SensorGeometry{f.nx, f.ny};
    cfg.bin.delta_t_us = f.dt_us;
    cfg.bin.theta_e = f.theta_e;
    cfg.bin.rho_lo = f.rho_lo;
    cfg.bin.rho_hi = f.rho_hi;
    cfg.bin.delta_t_min_us = std::min(f.dt_min_us, f.dt_us);
    cfg.bin.delta_t_max_us = std::max(f.dt_max_us, f.dt_us);
    cfg.bin.hold_bins = f.hold_bins < 0 ? static_cast<std::uint32_t>(f.depth)
                                        : static_cast<std::uint32_t>(f.hold_bins);
    cfg.bin.adapt = f.adapt;
    cfg.hyp.depth = f.depth;
    cfg.hyp.j_max = f.j_max;
    cfg.hyp.beta = f.beta;
    cfg.hyp.theta_s = f.theta_s;
    if (f.mode == "raw") cfg.hyp.mode = ScorerMode::RawPopcount;
    else if (f.mode == "normalized") cfg.hyp.mode = ScorerMode::NormalizedCrossmul;
    else throw CLI::ValidationError("--mode must be raw or normalized");
    if (f.variant == "trace") cfg.variant = ScorerVariant::Trace;
    else if (f.variant == "incremental") cfg.variant = ScorerVariant::Incremental;
    else throw CLI::ValidationError("--variant must be trace or incremental");
    cfg.hyp.legacy_trace = f.legacy_trace;
    cfg.hyp.audit = f.audit;
    cfg.enable_y = !f.no_y;
    cfg.validate();
    return cfg;
}

std::vector<std::string> config_header(const PipelineConfig& cfg) {
    std::vector<std::string> lines;
    std::ostringstream s;
    s << "nx=" << cfg.geom.nx << " ny=" << cfg.geom.ny
      << " dt_us=" << cfg.bin.delta_t_us << " theta_e=" << cfg.bin.theta_e
      << " L=" << cfg.hyp.depth << " J=" << cfg.hyp.j_max << " beta=" << cfg.hyp.beta
      << " theta_s=" << cfg.hyp.theta_s;
    lines.push_back(s.str());
    std::ostringstream s2;
    s2 << "mode=" << (cfg.hyp.mode == ScorerMode::RawPopcount ? "raw" : "normalized")
       << " variant=" << (cfg.variant == ScorerVariant::Trace ? "trace" : "incremental")
       << " adapt=" << (cfg.bin.adapt ? 1 : 0) << " rho_lo=" << cfg.bin.rho_lo
       << " rho_hi=" << cfg.bin.rho_hi << " dt_min_us=" << cfg.bin.delta_t_min_us
       << " dt_max_us=" << cfg.bin.delta_t_max_us << " hold_bins=" << cfg.bin.hold_bins
       << " enable_y=" << (cfg.enable_y ? 1 : 0)
       << " legacy_trace=" << (cfg.hyp.legacy_trace ? 1 : 0);
    lines.push_back(s2.str());
    return lines;
}

template <typename T>
std::vector<T> parse_list(const std::string& csv) {
    std::vector<T> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(static_cast<T>(std::stoull(tok)));
    }
    if (out.empty()) throw CLI::ValidationError("empty list: " + csv);
    return out;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    return out;
}

int cmd_run(const CommonFlags& flags, const std::string& input,
            const std::string& output, const std::string& svg_dir) {
    PipelineConfig cfg = make_config(flags);
    if (!cfg.hyp.validate(cfg.geom.nx))
        std::cerr << "warning: J=" << cfg.hyp.j_max << " exceeds recommended bound "
                  << cfg.geom.nx / cfg.hyp.depth << " (floor(N/L))\n";

    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot open event file: " + input);
    EventStream stream(in, cfg.geom);
    Pipeline2D pipe(cfg);
    std::vector<Detection> detections;
    std::uint64_t last_t = 0;
    std::map<std::int64_t, std::vector<Event>> bin_events;  // kept only for --svg-dir
    while (auto ev = stream.next()) {
        pipe.push(*ev, detections);
        last_t = ev->t;
        if (!svg_dir.empty())
            bin_events[static_cast<std::int64_t>(ev->t / cfg.bin.delta_t_us)].push_back(*ev);
    }
    pipe.flush(last_t + 1, detections);

    if (output.empty() || output == "-") {
        write_detections_csv(std::cout, detections, config_header(cfg));
    } else {
        auto out = open_out(output);
        write_detections_csv(out, detections, config_header(cfg));
    }

    if (!svg_dir.empty()) {
        std::map<std::int64_t, std::vector<Detection>> by_bin;
        for (const Detection& d : detections) by_bin[d.bin_index].push_back(d);
        for (const auto& [bin, dets] : by_bin) {
            const auto it = bin_events.find(bin);
            auto out = open_out(svg_dir + "/bin_" + std::to_string(bin) + ".svg");
            out << render_flow(it == bin_events.end() ? std::vector<Event>{} : it->second,
                               dets, cfg.geom);
        }
    }
    return 0;
}

int cmd_synth(const std::string& scene_path, std::int64_t seed_override,
              const std::string& out_events, const std::string& out_gt) {
    SceneConfig scene = load_scene_config(scene_path);
    if (seed_override >= 0) scene.noise.seed = static_cast<std::uint64_t>(seed_override);
    SceneOutput out = generate_scene(scene);
    {
        auto f = open_out(out_events);
        write_events(f, out.events);
    }
    if (!out_gt.empty()) {
        auto f = open_out(out_gt);
        write_segments_csv(f, out.segments);
    }
    std::cerr << out.events.size() << " events, " << out.segments.size()
              << " ground-truth segments\n";
    return 0;
}

int cmd_sweep(const CommonFlags& flags, const std::string& input,
              const std::string& segments_path, const std::string& dt_list,
              const std::string& theta_list, int n_min, const std::string& out_csv,
              const std::string& out_svg) {
    CommonFlags base = flags;
    SweepConfig sc;
    sc.delta_t_list = parse_list<std::uint64_t>(dt_list);
    sc.theta_e_list = parse_list<std::uint32_t>(theta_list);
    sc.n_min = n_min;
    if (base.dt_us == 0) base.dt_us = sc.delta_t_list.front();
    if (base.theta_e == 0) base.theta_e = sc.theta_e_list.front();
    base.adapt = false;
    sc.base = make_config(base);

    const auto events = read_events(input, sc.base.geom);
    const auto segments = load_segments_csv(segments_path);
    const auto cells = sweep(events, sc, segments);

    if (out_csv.empty() || out_csv == "-") {
        write_sweep_csv(std::cout, cells);
    } else {
        auto out = open_out(out_csv);
        write_sweep_csv(out, cells);
    }
    if (!out_svg.empty()) {
        auto out = open_out(out_svg);
        out << render_sweep_svg(cells, sc);
    }
    return 0;
}

int cmd_cost(int nx, int ny, int depth, int j_max, std::uint64_t clock_hz,
             const std::string& variant, const std::string& csv_path) {
    const ScorerVariant v =
        variant == "incremental" ? ScorerVariant::Incremental : ScorerVariant::Trace;
    const CostReport report = cost_model(nx, ny < 1 ? nx : ny, depth, j_max, clock_hz, v);
    write_cost_report(std::cout, report);
    if (!csv_path.empty()) {
        auto out = open_out(csv_path);
        write_cost_csv(out, report);
    }
    return 0;
}

int cmd_oracle_check(int cases, std::uint64_t seed) {
    const OracleCheckReport report = run_oracle_check(cases, seed);
    std::cout << "oracle-check: " << report.cases << " cases, " << report.pixels_checked
              << " pixels, " << report.mismatches << " mismatches\n";
    if (report.mismatches > 0) {
        std::cout << "first mismatch: " << report.first_mismatch << "\n";
        return 1;
    }
    return 0;
}

int cmd_render(const CommonFlags& flags, const std::string& events_path,
               const std::string& detections_path, std::int64_t bin,
               const std::string& out_path) {
    if (flags.dt_us == 0) throw CLI::ValidationError("--dt-us is required for render");
    SensorGeometry geom{flags.nx, flags.ny};
    const auto all_detections = [&] {
        std::ifstream in(detections_path);
        if (!in) throw std::runtime_error("cannot open detections: " + detections_path);
        return read_detections_csv(in);
    }();
    std::vector<Detection> dets;
    for (const Detection& d : all_detections)
        if (d.bin_index == bin) dets.push_back(d);

    std::vector<Event> frame;
    if (!events_path.empty()) {
        const std::uint64_t t_lo = bin * flags.dt_us, t_hi = (bin + 1) * flags.dt_us;
        for (const Event& ev : read_events(events_path, geom))
            if (ev.t >= t_lo && ev.t < t_hi) frame.push_back(ev);
    }
    auto out = open_out(out_path);
    out << render_flow(frame, dets, geom);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"EventShiftFlow streaming velocity estimator"};
    app.set_config("--config");
    app.require_subcommand(1);

    CommonFlags flags;

    auto* run = app.add_subcommand("run", "run the pipeline on an event file");
    std::string run_input, run_output, run_svg_dir;
    run->add_option("--input", run_input, "RPG-format events.txt")->required();
    run->add_option("--output", run_output, "detections CSV path (default stdout)");
    run->add_option("--svg-dir", run_svg_dir, "directory for per-bin flow SVGs");
    add_common_flags(run, flags);

    auto* synth = app.add_subcommand("synth", "generate a synthetic event stream");
    std::string scene_path, synth_events = "events.txt", synth_gt = "gt.csv";
    std::int64_t synth_seed = -1;
    synth->add_option("--scene", scene_path, "scene config file")->required();
    synth->add_option("--seed", synth_seed, "override the scene's RNG seed");
    synth->add_option("--out", synth_events, "output events path");
    synth->add_option("--gt", synth_gt, "output ground-truth CSV path");

    auto* sweep_cmd = app.add_subcommand("sweep", "(delta_t, theta_e) parameter sweep");
    std::string sweep_input, sweep_segments, sweep_dts, sweep_thetas;
    std::string sweep_csv, sweep_svg;
    int sweep_n_min = 50;
    sweep_cmd->add_option("--input", sweep_input, "RPG-format events.txt")->required();
    sweep_cmd->add_option("--segments", sweep_segments, "ground-truth segments CSV")
        ->required();
    sweep_cmd->add_option("--dt-list", sweep_dts, "comma-separated dt values, us")
        ->required();
    sweep_cmd->add_option("--theta-e-list", sweep_thetas, "comma-separated theta_e values")
        ->required();
    sweep_cmd->add_option("--n-min", sweep_n_min, "sufficient-detections threshold");
    sweep_cmd->add_option("--out-csv", sweep_csv, "sweep CSV path (default stdout)");
    sweep_cmd->add_option("--out-svg", sweep_svg, "sweep heat-map SVG path");
    add_common_flags(sweep_cmd, flags);

    auto* cost = app.add_subcommand("cost", "hardware cost / latency report");
    int cost_nx = 240, cost_ny = -1, cost_l = 16, cost_j = 15;
    std::uint64_t cost_clock = 100000000;
    std::string cost_variant = "trace", cost_csv;
    cost->add_option("--nx", cost_nx, "x-axis pixel count");
    cost->add_option("--ny", cost_ny, "y-axis pixel count (default: same as --nx)");
    cost->add_option("--l", cost_l, "temporal depth (L)");
    cost->add_option("--j", cost_j, "max hypothesis magnitude (J)");
    cost->add_option("--clock-hz", cost_clock, "clock frequency");
    cost->add_option("--variant", cost_variant, "trace | incremental");
    cost->add_option("--csv", cost_csv, "also write the report as CSV");

    auto* oracle = app.add_subcommand("oracle-check",
                                      "fuzz the scorer against the brute-force oracle");
    int oracle_cases = 10000;
    std::uint64_t oracle_seed = 1;
    oracle->add_option("--cases", oracle_cases, "number of randomized instances");
    oracle->add_option("--seed", oracle_seed, "RNG seed");

    auto* render = app.add_subcommand("render", "flow-field SVG from stored detections");
    std::string render_events, render_detections, render_out = "flow.svg";
    std::int64_t render_bin = 0;
    render->add_option("--events", render_events, "RPG-format events.txt (raster layer)");
    render->add_option("--detections", render_detections, "detections CSV")->required();
    render->add_option("--bin", render_bin, "bin index to render")->required();
    render->add_option("--out", render_out, "output SVG path");
    add_common_flags(render, flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(flags, run_input, run_output, run_svg_dir);
        if (synth->parsed()) return cmd_synth(scene_path, synth_seed, synth_events, synth_gt);
        if (sweep_cmd->parsed())
            return cmd_sweep(flags, sweep_input, sweep_segments, sweep_dts, sweep_thetas,
                             sweep_n_min, sweep_csv, sweep_svg);
        if (cost->parsed())
            return cmd_cost(cost_nx, cost_ny, cost_l, cost_j, cost_clock, cost_variant,
                            cost_csv);
        if (oracle->parsed()) return cmd_oracle_check(oracle_cases, oracle_seed);
        if (render->parsed())
            return cmd_render(flags, render_events, render_detections, render_bin,
                              render_out);
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
