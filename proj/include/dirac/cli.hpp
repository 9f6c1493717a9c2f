#pragma once

// Commands behind the `dirac` executable. Every command returns its process
// exit code: 0 on success, 1 when a numerical check fails, 2 for usage and
// I/O problems. Output files are written atomically.
//
// Requires nlohmann/json (configs and JSON outputs).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dirac/dirac.hpp"

namespace dirac::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_check_failed = 1;
inline constexpr int exit_usage = 2;

namespace fs = std::filesystem;
using nlohmann::json;

/// Runs `body`, turning library exceptions into exit codes and a message on `err`.
inline int guarded(std::ostream& err, const std::function<int()>& body) {
    try {
        return body();
    } catch (const io_error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
    } catch (const json::exception& e) {
        err << "error: bad JSON: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_check_failed;
    }
    return exit_usage;
}

inline json load_json(const std::optional<fs::path>& path) {
    if (!path) return json::object();
    if (!fs::exists(*path)) throw io_error("no such file: " + path->string());
    auto j = json::parse(read_file(*path));
    if (!j.is_object()) throw invalid_argument(path->string() + ": config must be a JSON object");
    return j;
}

namespace detail {

inline void reject_unknown_keys(const json& j, std::initializer_list<const char*> known, const char* what) {
    for (const auto& [key, value] : j.items())
        if (std::none_of(known.begin(), known.end(), [&](const char* k) { return key == k; }))
            throw invalid_argument(std::string(what) + ": unknown key '" + key + "'");
}

inline void ensure_parent(const fs::path& file) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

inline std::string csv_field(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, sep)) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

}  // namespace detail

/// Keys: radii, epsilon, target_dims, full_range, per_radius_channels.
inline DatrConfig parse_datr_config(const json& j) {
    detail::reject_unknown_keys(j, {"radii", "epsilon", "target_dims", "full_range", "per_radius_channels"},
                                "datr config");
    DatrConfig c;
    if (j.contains("radii")) c.radii = j.at("radii").get<std::vector<int>>();
    if (j.contains("epsilon")) c.epsilon = j.at("epsilon").get<double>();
    if (j.contains("target_dims")) c.target_dims = j.at("target_dims").get<Extents>();
    if (j.contains("full_range")) c.full_range = j.at("full_range").get<bool>();
    if (j.contains("per_radius_channels")) c.per_radius_channels = j.at("per_radius_channels").get<bool>();
    c.validate();
    return c;
}

inline DatasetConfig parse_dataset_config(const json& j) {
    detail::reject_unknown_keys(j,
                                {"positive_fraction", "dims", "noise_sigma", "min_radius", "max_radius", "rim_width",
                                 "interior", "rim_contrast", "center_jitter", "lesions_per_subject"},
                                "dataset config");
    DatasetConfig c;
    if (j.contains("positive_fraction")) c.positive_fraction = j.at("positive_fraction").get<double>();
    if (j.contains("dims")) c.dims = j.at("dims").get<Extents>();
    if (j.contains("noise_sigma")) c.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("min_radius")) c.min_radius = j.at("min_radius").get<double>();
    if (j.contains("max_radius")) c.max_radius = j.at("max_radius").get<double>();
    if (j.contains("rim_width")) c.rim_width = j.at("rim_width").get<std::pair<double, double>>();
    if (j.contains("interior")) c.interior = j.at("interior").get<std::pair<double, double>>();
    if (j.contains("rim_contrast")) c.rim_contrast = j.at("rim_contrast").get<std::pair<double, double>>();
    if (j.contains("center_jitter")) c.center_jitter = j.at("center_jitter").get<double>();
    if (j.contains("lesions_per_subject")) c.lesions_per_subject = j.at("lesions_per_subject").get<std::size_t>();
    return c;
}

/// Writes a PGM when the path ends in .pgm (single-channel 2D maps only),
/// otherwise a raw tensor.
inline void write_map(const fs::path& path, const FeatureMap<double>& map, PgmFormat format = PgmFormat::Binary) {
    detail::ensure_parent(path);
    if (path.extension() == ".pgm") {
        if (map.channels() != 1 || map.rank() != 2)
            throw shape_mismatch("PGM output needs a single-channel 2D map, got " + to_string(map.shape()));
        write_file_atomic(path, encode_pgm(map.data(), map.dims()[0], map.dims()[1], format));
        return;
    }
    write_tensor(path, map);
}

// ---------------------------------------------------------------------------

struct DatrArgs {
    fs::path input;
    std::optional<fs::path> config;
    /// Output prefix; files are <prefix>_vu.dact, <prefix>_vs.dact,
    /// <prefix>_{vu,vs}_c<c>_z<z>.pgm and <prefix>.json.
    std::string output = "datr";
    std::optional<std::vector<int>> radii;
    bool full_range = false;
    PgmFormat pgm = PgmFormat::Binary;
};

inline int cmd_datr(const DatrArgs& args, std::ostream& out, std::ostream& err, const Exec& exec = Exec::from_env()) {
    return guarded(err, [&] {
        DatrConfig cfg = parse_datr_config(load_json(args.config));
        if (args.radii) cfg.radii = *args.radii;
        if (args.full_range) cfg.full_range = true;
        cfg.validate();
        const auto source = read_map(args.input);
        if (source.rank() != 2 && source.rank() != 3)
            throw shape_mismatch(args.input.string() + ": expected a 2D image or a 3D volume, got extents " +
                                 to_string(source.dims()));
        const bool volumetric = source.rank() == 3;
        const auto result = volumetric ? datr_volume(source, cfg, exec) : datr_transform(source, cfg, exec);

        const fs::path prefix = args.output;
        detail::ensure_parent(prefix);
        write_tensor(prefix.string() + "_vu.dact", result.v_u);
        write_tensor(prefix.string() + "_vs.dact", result.v_s);

        json peaks = json::array();
        const std::size_t slices = volumetric ? result.v_s.dims()[0] : 1;
        for (std::size_t c = 0; c < result.v_s.channels(); ++c) {
            for (std::size_t z = 0; z < slices; ++z) {
                const auto vs = volumetric ? axial_slice(result.v_s, z) : result.v_s;
                const auto vu = volumetric ? axial_slice(result.v_u, z) : result.v_u;
                const std::size_t cols = vs.dims()[1];
                auto s = vs.channel(c), u = vu.channel(c);
                const auto best = static_cast<std::size_t>(std::max_element(s.begin(), s.end()) - s.begin());
                peaks.push_back({{"channel", c}, {"slice", z}, {"x", best / cols}, {"y", best % cols},
                                 {"v_s", s[best]}});
                const std::string tag = "_c" + std::to_string(c) + "_z" + std::to_string(z) + ".pgm";
                write_file_atomic(prefix.string() + "_vs" + tag, encode_pgm(s, vs.dims()[0], cols, args.pgm));
                write_file_atomic(prefix.string() + "_vu" + tag, encode_pgm(u, vs.dims()[0], cols, args.pgm));
            }
        }
        json sidecar = {{"input", args.input.filename().string()},
                        {"source_shape", source.shape()},
                        {"output_shape", result.v_s.shape()},
                        {"radii", cfg.effective_radii(volumetric ? Extents{source.dims()[1], source.dims()[2]}
                                                                 : source.dims())},
                        {"full_range", cfg.full_range},
                        {"per_radius_channels", cfg.per_radius_channels},
                        {"epsilon", cfg.epsilon},
                        {"argmax", peaks}};
        write_file_atomic(prefix.string() + ".json", sidecar.dump(2) + "\n");
        for (const auto& p : peaks)
            out << "argmax v_s channel " << p["channel"] << " slice " << p["slice"] << ": (" << p["x"] << ", "
                << p["y"] << ") = " << format_double(p["v_s"].get<double>()) << '\n';
        return exit_ok;
    });
}

// ---------------------------------------------------------------------------

struct GradcheckArgs {
    Extents size{6, 6};
    std::size_t grids = 3;
    Kernel kernel = Kernel::Bilinear;
    std::uint64_t seed = 0;
};

struct GradcheckReport {
    double deda_error = 0;
    double sample_source_error = 0;
    double sample_grid_error = 0;
    bool grid_gradient_zero = false;
    double adjoint = 0;
    bool passed = false;
};

inline constexpr double gradcheck_tolerance = 1e-4;
inline constexpr double gradcheck_step = 1e-5;

namespace detail {

inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
    std::vector<double> g(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double keep = x[i];
        x[i] = keep + h;
        const double up = f(x);
        x[i] = keep - h;
        const double down = f(x);
        x[i] = keep;
        g[i] = (up - down) / (2 * h);
    }
    return g;
}

inline double relative_error(std::span<const double> analytic, std::span<const double> numeric) {
    double err = 0, scale = 0;
    for (std::size_t i = 0; i < analytic.size(); ++i) {
        err = std::max(err, std::abs(analytic[i] - numeric[i]));
        scale = std::max(scale, std::abs(numeric[i]));
    }
    return scale > 0 ? err / scale : err;
}

}  // namespace detail

/// Random source, probe and grids drawn from `seed`. Grid coordinates stay
/// 1e-3 away from the kernel's kinks (integers for bilinear, half-integers
/// for the integer kernel) so central differences never straddle one.
inline GradcheckReport run_gradcheck(const GradcheckArgs& args, const Exec& exec = Exec::sequential()) {
    if (args.size.empty() || args.size.size() > max_target_rank)
        throw invalid_argument("gradcheck: size needs 1 to 3 extents");
    for (auto d : args.size)
        if (d < 1 || d > 16) throw invalid_argument("gradcheck: extents must lie in 1..16");
    if (args.grids < 1 || args.grids > 64) throw invalid_argument("gradcheck: grid count must lie in 1..64");

    Rng rng(args.seed, 20);
    const Extents& dims = args.size;
    const std::size_t rank = dims.size(), n = volume(dims);
    auto random_map = [&] {
        FeatureMap<double> m(1, dims);
        for (auto& v : m.data()) v = rng.uniform(-1, 1);
        return m;
    };
    const double kink = args.kernel == Kernel::Bilinear ? 0.0 : 0.5;
    std::vector<SamplingGrid<double>> list;
    for (std::size_t k = 0; k < args.grids; ++k) {
        SamplingGrid<double> g(rank, dims);
        for (std::size_t q = 0; q < rank; ++q)
            for (std::size_t loc = 0; loc < n; ++loc) {
                double v;
                do v = rng.uniform(-1.0, static_cast<double>(dims[q]));
                while (std::abs(v - kink - std::round(v - kink)) < 1e-3);
                g.coord(q, loc) = v;
            }
        list.push_back(std::move(g));
    }
    const GridSet<double> grids(list);
    const auto u = random_map();
    const auto a = random_map();

    GradcheckReport r;
    const auto grad = deda_backward(a, grids, args.kernel, dims, exec);
    const auto fd = detail::central_difference(
        [&](const std::vector<double>& x) {
            return inner_product(deda_forward(FeatureMap<double>(1, dims, x), grids, args.kernel, dims, exec), a);
        },
        u.values(), gradcheck_step);
    r.deda_error = detail::relative_error(grad.data(), fd);

    const auto& grid = grids[0];
    const auto sg = grid_sample_backward(a, u, grid, args.kernel, exec);
    const auto fd_src = detail::central_difference(
        [&](const std::vector<double>& x) {
            return inner_product(grid_sample(FeatureMap<double>(1, dims, x), grid, args.kernel, exec), a);
        },
        u.values(), gradcheck_step);
    r.sample_source_error = detail::relative_error(sg.grad_source.data(), fd_src);
    const auto fd_grid = detail::central_difference(
        [&](const std::vector<double>& x) {
            return inner_product(grid_sample(u, SamplingGrid<double>(rank, dims, x), args.kernel, exec), a);
        },
        std::vector<double>(grid.coords().begin(), grid.coords().end()), gradcheck_step);
    r.sample_grid_error = detail::relative_error(sg.grad_grid.coords(), fd_grid);
    r.grid_gradient_zero = std::all_of(sg.grad_grid.coords().begin(), sg.grad_grid.coords().end(),
                                       [](double v) { return v == 0.0; });
    r.adjoint = adjoint_check(u, a, grids, args.kernel, exec);
    r.passed = r.deda_error <= gradcheck_tolerance && r.sample_source_error <= gradcheck_tolerance &&
               r.sample_grid_error <= gradcheck_tolerance;
    return r;
}

inline int cmd_gradcheck(const GradcheckArgs& args, std::ostream& out, std::ostream& err,
                         const Exec& exec = Exec::from_env()) {
    return guarded(err, [&] {
        const auto r = run_gradcheck(args, exec);
        out << "size " << to_string(args.size) << ", " << args.grids << " grids, " << to_string(args.kernel)
            << " kernel, seed " << args.seed << '\n';
        out << "deda_backward max relative error: " << format_double(r.deda_error) << '\n';
        out << "grid_sample_backward source max relative error: " << format_double(r.sample_source_error) << '\n';
        out << "grid_sample_backward grid max relative error: " << format_double(r.sample_grid_error)
            << (r.grid_gradient_zero ? " (grid gradient identically zero)" : "") << '\n';
        out << "adjoint relative discrepancy: " << format_double(r.adjoint) << '\n';
        out << (r.passed ? "PASS" : "FAIL") << '\n';
        return r.passed ? exit_ok : exit_check_failed;
    });
}

// ---------------------------------------------------------------------------

/// Manifest CSV with a header row. Required columns: id, kind (rim+/rim-),
/// file (relative to the manifest). Optional: subject (defaults to id),
/// radius, center (';'-separated), seed. No quoting.
inline std::vector<Sample> read_manifest(const fs::path& path) {
    if (!fs::exists(path)) throw io_error("no such file: " + path.string());
    std::istringstream in(read_file(path));
    std::string line;
    std::vector<std::string> header;
    while (header.empty() && std::getline(in, line))
        if (line.find_first_not_of(" \t\r") != std::string::npos) header = detail::split(line, ',');
    if (header.empty()) throw invalid_argument(path.string() + ": manifest is empty");
    std::map<std::string, std::size_t> col;
    for (std::size_t i = 0; i < header.size(); ++i) col[header[i]] = i;
    for (const char* need : {"id", "kind", "file"})
        if (!col.count(need)) throw invalid_argument(path.string() + ": manifest lacks a '" + need + "' column");

    std::vector<Sample> samples;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = detail::split(line, ',');
        if (cells.size() != header.size())
            throw invalid_argument(path.string() + ":" + std::to_string(row) + ": expected " +
                                   std::to_string(header.size()) + " fields");
        auto get = [&](const char* name) { return col.count(name) ? cells[col[name]] : std::string(); };
        Sample s;
        s.id = get("id");
        s.subject = get("subject").empty() ? s.id : get("subject");
        s.spec.kind = parse_lesion_kind(get("kind"));
        if (!get("radius").empty()) s.spec.radius = std::stod(get("radius"));
        if (!get("seed").empty()) s.spec.seed = std::stoull(get("seed"));
        if (!get("center").empty())
            for (const auto& v : detail::split(get("center"), ';')) s.spec.center.push_back(std::stod(v));
        s.patch = read_map(path.parent_path() / get("file"));
        samples.push_back(std::move(s));
    }
    if (samples.empty()) throw invalid_argument(path.string() + ": manifest has no entries");
    return samples;
}

struct GenerateArgs {
    std::size_t count = 500;
    std::uint64_t seed = 7;
    std::optional<fs::path> config;
    fs::path output = "dataset";
};

/// Writes one raw tensor per patch and manifest.csv into the output directory.
inline int cmd_generate(const GenerateArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const json cfg = load_json(args.config);
        detail::reject_unknown_keys(cfg, {"dataset", "datr", "folds"}, "config");
        DatasetConfig dc = parse_dataset_config(cfg.value("dataset", json::object()));
        dc.count = args.count;
        dc.seed = args.seed;
        const auto samples = make_dataset(dc);
        fs::create_directories(args.output);
        std::string manifest = "id,subject,kind,radius,center,seed,file\n";
        for (const auto& s : samples) {
            const std::string file = s.id + ".dact";
            write_tensor(args.output / file, s.patch);
            std::string centre;
            for (std::size_t a = 0; a < s.spec.center.size(); ++a)
                centre += (a ? ";" : "") + format_double(s.spec.center[a]);
            manifest += s.id + "," + s.subject + "," + to_string(s.spec.kind) + "," + format_double(s.spec.radius) +
                        "," + centre + "," + std::to_string(s.spec.seed) + "," + file + "\n";
        }
        write_file_atomic(args.output / "manifest.csv", manifest);
        out << "wrote " << samples.size() << " patches to " << args.output.string() << '\n';
        return exit_ok;
    });
}

struct BenchArgs {
    std::optional<fs::path> manifest;
    std::optional<std::size_t> generate;
    std::optional<fs::path> config;
    std::uint64_t seed = 7;
    fs::path output = "bench";
    std::optional<std::vector<int>> radii;
    bool full_range = false;
};

namespace detail {

inline json report_json(const MetricsReport& r) {
    json j = {{"accuracy", r.accuracy}, {"f1", r.f1},
              {"sensitivity", r.sensitivity}, {"specificity", r.specificity},
              {"precision", r.precision}, {"roc_auc", r.roc_auc},
              {"proc_auc", r.proc_auc}, {"pr_auc", r.pr_auc},
              {"threshold", r.threshold}, {"tp", r.tp},
              {"fp", r.fp}, {"tn", r.tn},
              {"fn", r.fn}};
    j["pearson_rho"] = r.pearson_rho ? json(*r.pearson_rho) : json(nullptr);
    j["mse"] = r.mse ? json(*r.mse) : json(nullptr);
    return j;
}

inline std::string report_csv_row(const std::string& scope, const std::optional<MetricsReport>& r) {
    if (!r) return scope + ",,,,,,,,,,,,,,,\n";
    std::string row = scope;
    for (double v : {r->accuracy, r->f1, r->sensitivity, r->specificity, r->precision, r->roc_auc, r->proc_auc,
                     r->pr_auc})
        row += "," + format_double(v);
    row += "," + csv_field(r->pearson_rho) + "," + csv_field(r->mse) + "," + format_double(r->threshold);
    for (auto v : {r->tp, r->fp, r->tn, r->fn}) row += "," + std::to_string(v);
    return row + "\n";
}

}  // namespace detail

/// Outputs in the output directory: metrics.csv, metrics.json, folds.csv and
/// scores.csv.
inline int cmd_bench(const BenchArgs& args, std::ostream& out, std::ostream& err,
                     const Exec& exec = Exec::from_env()) {
    return guarded(err, [&] {
        if (args.manifest.has_value() == args.generate.has_value())
            throw invalid_argument("bench: give exactly one of --input <manifest> or --generate N");
        const json cfg = load_json(args.config);
        detail::reject_unknown_keys(cfg, {"dataset", "datr", "folds"}, "config");
        DatrConfig datr = parse_datr_config(cfg.value("datr", json::object()));
        if (args.radii) datr.radii = *args.radii;
        if (args.full_range) datr.full_range = true;
        datr.validate();
        const int folds = cfg.value("folds", 5);

        std::vector<Sample> samples;
        if (args.generate) {
            DatasetConfig dc = parse_dataset_config(cfg.value("dataset", json::object()));
            dc.count = *args.generate;
            dc.seed = args.seed;
            samples = make_dataset(dc);
        } else {
            samples = read_manifest(*args.manifest);
        }
        const auto positives = std::count_if(samples.begin(), samples.end(),
                                             [](const Sample& s) { return s.spec.kind == LesionKind::RimPositive; });
        if (positives == 0 || positives == static_cast<long>(samples.size()))
            throw invalid_argument("bench: the dataset holds a single class; both rim+ and rim- are required");

        const auto res = run_benchmark(samples, datr, folds, args.seed, exec);
        fs::create_directories(args.output);

        std::string csv = "scope,accuracy,f1,sensitivity,specificity,precision,roc_auc,proc_auc,pr_auc,pearson_rho,"
                          "mse,threshold,tp,fp,tn,fn\n";
        csv += detail::report_csv_row("pooled", res.pooled);
        for (const auto& f : res.folds) csv += detail::report_csv_row("fold" + std::to_string(f.fold), f.report);
        write_file_atomic(args.output / "metrics.csv", csv);

        json folds_json = json::array();
        for (const auto& f : res.folds)
            folds_json.push_back({{"fold", f.fold},
                                  {"train_threshold", f.train_threshold},
                                  {"report", f.report ? detail::report_json(*f.report) : json(nullptr)}});
        const json metrics = {{"samples", samples.size()},
                              {"positives", positives},
                              {"seed", args.seed},
                              {"folds", folds},
                              {"pooled", detail::report_json(res.pooled)},
                              {"per_fold", folds_json}};
        write_file_atomic(args.output / "metrics.json", metrics.dump(2) + "\n");

        std::string fold_csv = "subject,rim_count,group,fold\n";
        for (const auto& e : res.assignment.entries)
            fold_csv += e.id + "," + std::to_string(e.rim_count) + "," + std::to_string(e.group) + "," +
                        std::to_string(e.fold) + "\n";
        write_file_atomic(args.output / "folds.csv", fold_csv);

        std::string scores = "id,subject,label,score,predicted\n";
        for (std::size_t i = 0; i < samples.size(); ++i)
            scores += samples[i].id + "," + samples[i].subject + "," + to_string(samples[i].spec.kind) + "," +
                      format_double(res.scores[i]) + "," + (res.predicted[i] ? "1" : "0") + "\n";
        write_file_atomic(args.output / "scores.csv", scores);

        const auto& p = res.pooled;
        out << samples.size() << " patches (" << positives << " rim+), " << folds << " folds\n"
            << "ROC AUC " << format_double(p.roc_auc) << ", pROC AUC " << format_double(p.proc_auc) << ", PR AUC "
            << format_double(p.pr_auc) << ", F1 " << format_double(p.f1) << '\n';
        return exit_ok;
    });
}

// ---------------------------------------------------------------------------

struct RadonArgs {
    fs::path input, output;
    double angle = 0.0;
    std::size_t bins = 0;  // 0: ceil of the image diagonal
};

inline int cmd_radon(const RadonArgs& args, std::ostream& out, std::ostream& err,
                     const Exec& exec = Exec::from_env()) {
    return guarded(err, [&] {
        const auto source = read_map(args.input);
        if (source.rank() != 2) throw shape_mismatch("radon: expected a 2D image");
        const std::size_t bins = args.bins ? args.bins
                                           : static_cast<std::size_t>(std::ceil(std::hypot(
                                                 static_cast<double>(source.dims()[0]),
                                                 static_cast<double>(source.dims()[1]))));
        const auto p = radon_projection(source, args.angle, bins, exec);
        write_map(args.output, p);
        out << "projection with " << bins << " bins written to " << args.output.string() << '\n';
        return exit_ok;
    });
}

struct HoughArgs {
    fs::path input, output;
    std::size_t num_rho = 0;  // 0: 2 * diagonal + 1
    std::size_t num_theta = 180;
};

inline int cmd_hough(const HoughArgs& args, std::ostream& out, std::ostream& err,
                     const Exec& exec = Exec::from_env()) {
    return guarded(err, [&] {
        const auto edges = read_map(args.input);
        if (edges.rank() != 2) throw shape_mismatch("hough: expected a 2D edge map");
        const std::size_t num_rho =
            args.num_rho ? args.num_rho
                         : 2 * static_cast<std::size_t>(std::ceil(hough_diagonal(edges.dims()[0], edges.dims()[1]))) + 1;
        const auto acc = hough_lines(edges, num_rho, args.num_theta, exec);
        write_map(args.output, acc);
        auto d = acc.channel(0);
        const auto best = static_cast<std::size_t>(std::max_element(d.begin(), d.end()) - d.begin());
        out << "peak at rho bin " << best / args.num_theta << ", theta bin " << best % args.num_theta << '\n';
        return exit_ok;
    });
}

struct PolarArgs {
    fs::path input, output;
    std::optional<std::pair<double, double>> center;  // default: image centre
    std::size_t num_r = 0;                             // 0: distance to the nearest border + 1
    std::size_t num_phi = 64;
};

inline int cmd_polar(const PolarArgs& args, std::ostream& out, std::ostream& err,
                     const Exec& exec = Exec::from_env()) {
    return guarded(err, [&] {
        const auto source = read_map(args.input);
        if (source.rank() != 2) throw shape_mismatch("polar: expected a 2D image");
        const double rows = static_cast<double>(source.dims()[0]), cols = static_cast<double>(source.dims()[1]);
        const auto centre = args.center.value_or(std::pair{(rows - 1) / 2, (cols - 1) / 2});
        const std::size_t num_r =
            args.num_r ? args.num_r
                       : static_cast<std::size_t>(std::floor(std::min({centre.first, centre.second,
                                                                       rows - 1 - centre.first,
                                                                       cols - 1 - centre.second}))) + 1;
        const auto p = polar_resample(source, centre, num_r, args.num_phi, exec);
        write_map(args.output, p);
        out << "polar map " << num_r << " x " << args.num_phi << " written to " << args.output.string() << '\n';
        return exit_ok;
    });
}

struct QsmArgs {
    fs::path input, output;
    double noise_sigma = 0.0;
    std::uint64_t seed = 0;
    std::array<double, 3> voxel_size{1.0, 1.0, 1.0};
};

inline int cmd_qsm(const QsmArgs& args, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const auto chi = read_map(args.input);
        const auto phantom = qsm_forward(chi, args.noise_sigma, args.seed, args.voxel_size);
        write_map(args.output, phantom.field);
        out << "field map " << to_string(phantom.field.dims()) << " written to " << args.output.string() << '\n';
        return exit_ok;
    });
}

}  // namespace dirac::cli
