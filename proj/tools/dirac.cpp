#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dirac/cli.hpp"

namespace cli = dirac::cli;

namespace {

std::vector<int> parse_radii(const std::string& text) {
    std::vector<int> radii;
    for (const auto& cell : cli::detail::split(text, ',')) {
        try {
            std::size_t used = 0;
            radii.push_back(std::stoi(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw CLI::ValidationError("--radii", "'" + cell + "' is not an integer");
        }
    }
    return radii;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Differentiable accumulation operators, rim transform and synthetic rim benchmark"};
    app.require_subcommand(1);

    std::string radii_text;
    std::string kernel_text = "bilinear";

    cli::DatrArgs datr;
    bool ascii = false;
    auto* datr_cmd = app.add_subcommand("datr", "Rim transform of a 2D image or 3D volume");
    datr_cmd->add_option("--input", datr.input, "Raw tensor (.dact) or PGM")->required();
    datr_cmd->add_option("--output", datr.output, "Output prefix")->capture_default_str();
    datr_cmd->add_option("--config", datr.config, "JSON rim-transform config");
    datr_cmd->add_option("--radii", radii_text, "Comma-separated shift distances");
    datr_cmd->add_flag("--full-range", datr.full_range, "Use every shift 1..max(H, W)");
    datr_cmd->add_flag("--ascii", ascii, "Write P2 instead of P5 renderings");

    cli::GradcheckArgs grad;
    std::vector<std::size_t> size;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Analytic gradients against central differences");
    grad_cmd->add_option("--size", size, "Spatial extents, at most 16 each (default 6 6)");
    grad_cmd->add_option("--grids", grad.grids, "Number of sampling grids")->capture_default_str();
    grad_cmd->add_option("--kernel", kernel_text, "integer or bilinear")->capture_default_str();
    grad_cmd->add_option("--seed", grad.seed)->capture_default_str();

    cli::BenchArgs bench;
    std::string manifest;
    std::size_t generate = 0;
    auto* bench_cmd = app.add_subcommand("bench", "Cross-validated rim classification benchmark");
    bench_cmd->add_option("--input", manifest, "Manifest CSV");
    bench_cmd->add_option("--generate", generate, "Generate N synthetic patches instead");
    bench_cmd->add_option("--config", bench.config, "JSON config with dataset/datr/folds sections");
    bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
    bench_cmd->add_option("--output", bench.output, "Output directory")->capture_default_str();
    bench_cmd->add_option("--radii", radii_text, "Comma-separated shift distances");
    bench_cmd->add_flag("--full-range", bench.full_range, "Use every shift 1..max(H, W)");

    cli::GenerateArgs gen;
    auto* gen_cmd = app.add_subcommand("generate", "Write a synthetic patch set with a manifest");
    gen_cmd->add_option("--generate", gen.count, "Number of patches")->capture_default_str();
    gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
    gen_cmd->add_option("--config", gen.config, "JSON config with a dataset section");
    gen_cmd->add_option("--output", gen.output, "Output directory")->capture_default_str();

    cli::RadonArgs radon;
    auto* radon_cmd = app.add_subcommand("radon", "Single-angle Radon projection");
    radon_cmd->add_option("--input", radon.input)->required();
    radon_cmd->add_option("--output", radon.output, ".dact or .pgm")->required();
    radon_cmd->add_option("--angle", radon.angle, "Radians")->capture_default_str();
    radon_cmd->add_option("--bins", radon.bins, "Number of bins (default: diagonal)");

    cli::HoughArgs hough;
    auto* hough_cmd = app.add_subcommand("hough", "Hough line accumulator of an edge map");
    hough_cmd->add_option("--input", hough.input)->required();
    hough_cmd->add_option("--output", hough.output, ".dact or .pgm")->required();
    hough_cmd->add_option("--rho", hough.num_rho, "Number of rho bins (default: 2 * diagonal + 1)");
    hough_cmd->add_option("--theta", hough.num_theta)->capture_default_str();

    cli::PolarArgs polar;
    std::vector<double> centre;
    auto* polar_cmd = app.add_subcommand("polar", "Polar resampling about a centre");
    polar_cmd->add_option("--input", polar.input)->required();
    polar_cmd->add_option("--output", polar.output, ".dact or .pgm")->required();
    polar_cmd->add_option("--center", centre, "x y (default: image centre)")->expected(2);
    polar_cmd->add_option("--num-r", polar.num_r, "Number of radius bins");
    polar_cmd->add_option("--num-phi", polar.num_phi)->capture_default_str();

    cli::QsmArgs qsm;
    auto* qsm_cmd = app.add_subcommand("qsm", "Dipole forward model of a susceptibility volume");
    qsm_cmd->add_option("--input", qsm.input)->required();
    qsm_cmd->add_option("--output", qsm.output)->required();
    qsm_cmd->add_option("--noise", qsm.noise_sigma)->capture_default_str();
    qsm_cmd->add_option("--seed", qsm.seed)->capture_default_str();

    try {
        app.parse(argc, argv);
        if (!radii_text.empty()) {
            datr.radii = parse_radii(radii_text);
            bench.radii = datr.radii;
        }
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::exit_usage;
    }

    auto& out = std::cout;
    auto& err = std::cerr;
    if (*datr_cmd) {
        datr.pgm = ascii ? dirac::PgmFormat::Ascii : dirac::PgmFormat::Binary;
        return cli::cmd_datr(datr, out, err);
    }
    if (*grad_cmd) {
        if (!size.empty()) grad.size = dirac::Extents(size.begin(), size.end());
        try {
            grad.kernel = dirac::parse_kernel(kernel_text);
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return cli::exit_usage;
        }
        return cli::cmd_gradcheck(grad, out, err);
    }
    if (*bench_cmd) {
        if (!manifest.empty()) bench.manifest = manifest;
        if (bench_cmd->count("--generate")) bench.generate = generate;
        return cli::cmd_bench(bench, out, err);
    }
    if (*gen_cmd) return cli::cmd_generate(gen, out, err);
    if (*radon_cmd) return cli::cmd_radon(radon, out, err);
    if (*hough_cmd) return cli::cmd_hough(hough, out, err);
    if (*polar_cmd) {
        if (centre.size() == 2) polar.center = std::pair{centre[0], centre[1]};
        return cli::cmd_polar(polar, out, err);
    }
    return cli::cmd_qsm(qsm, out, err);
}
