// Command-line surface: evaluation of exp^(n), chi-grid export, the
// addiplication interpolation curve, layer gradient checking and the
// variable pattern-shift demo. Exit codes: 0 success, 1 check failure,
// 2 usage error, 3 domain/numeric error.

#include <iterexp/abel.hpp>
#include <iterexp/addiplication.hpp>
#include <iterexp/io.hpp>
#include <iterexp/layers.hpp>
#include <iterexp/schroeder.hpp>
#include <iterexp/serialize.hpp>
#include <iterexp/shift_task.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

namespace {

using iterexp::Backend;
using iterexp::Complex;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

int thread_cap() {
    const char* env = std::getenv("ITEREXP_THREADS");
    if (env == nullptr) return 1;
    int v = std::atoi(env);
    if (v < 1) return 1;
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? std::min(v, static_cast<int>(hw)) : v;
}

Complex parse_complex_arg(const std::string& text) {
    try {
        return iterexp::io::parse_complex(text);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
}

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open output file: " + path);
    return out;
}

// ---------------------------------------------------------------- eval ----

struct EvalOptions {
    std::string x_text, z_text;
    double n = 0.0;
    std::string backend = "auto";
    double beta = -0.5;
    double r0 = 1e-6;
};

int run_eval(const EvalOptions& opt) {
    if (opt.x_text.empty() == opt.z_text.empty())
        throw UsageError("eval: provide exactly one of --x or --z");

    bool use_abel = opt.backend == "abel" || (opt.backend == "auto" && !opt.x_text.empty());
    Complex z = parse_complex_arg(opt.x_text.empty() ? opt.z_text : opt.x_text);

    json out;
    out["n"] = opt.n;
    if (use_abel) {
        out["backend"] = "abel";
        if (std::abs(z.imag()) > 1e-12)
            throw iterexp::DomainError("eval: Abel backend requires a real argument");
        iterexp::abel::ExtendedReal value = iterexp::abel::exp_iter(z.real(), opt.n);
        if (value.is_neg_infinity()) {
            std::cout << "exp^(" << opt.n << ")(" << z.real() << ") = -infinity\n";
            out["value"] = "-infinity";
            out["d_dx"] = nullptr;
            out["d_dn"] = nullptr;
        } else {
            auto d = iterexp::abel::exp_iter_derivatives(z.real(), opt.n);
            std::cout << "exp^(" << opt.n << ")(" << z.real()
                      << ") = " << iterexp::io::format_double(value.value()) << "\n"
                      << "  d/dx = " << iterexp::io::format_double(d.d_dx) << "\n"
                      << "  d/dn = " << iterexp::io::format_double(d.d_dn) << "\n";
            out["value"] = value.value();
            out["d_dx"] = d.d_dx;
            out["d_dn"] = d.d_dn;
        }
    } else {
        out["backend"] = "schroeder";
        iterexp::schroeder::SchroederConfig config;
        config.branch.beta = opt.beta;
        config.r0 = opt.r0;
        auto ctx = iterexp::schroeder::make_context(config);
        auto d = iterexp::schroeder::exp_iter_derivatives(z, opt.n, ctx);
        std::cout << "exp^(" << opt.n << ")(" << iterexp::io::format_complex(z)
                  << ") = " << iterexp::io::format_complex(d.value) << "\n"
                  << "  d/dz = " << iterexp::io::format_complex(d.d_dz) << "\n"
                  << "  d/dn = " << iterexp::io::format_complex(d.d_dn) << "\n";
        out["value"] = complex_json(d.value);
        out["d_dz"] = complex_json(d.d_dz);
        out["d_dn"] = complex_json(d.d_dn);
    }
    std::cout << out.dump() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- grid ----

struct GridOptions {
    iterexp::schroeder::GridSpec spec;
    std::string quantity = "chi";
    double beta = -0.5;
    double r0 = 1e-6;
    std::string out_path = "grid.csv";
};

int run_grid(const GridOptions& opt) {
    if (!(opt.spec.re_min < opt.spec.re_max) || !(opt.spec.im_min < opt.spec.im_max)) {
        std::cerr << "grid: invalid region (min must be below max)\n";
        return kExitNumeric;
    }
    if (opt.spec.n_re < 2 || opt.spec.n_im < 2) {
        std::cerr << "grid: resolution must be >= 2 per axis\n";
        return kExitNumeric;
    }
    iterexp::schroeder::GridSpec spec = opt.spec;
    spec.quantity = opt.quantity == "chi" ? iterexp::schroeder::GridQuantity::chi
                                          : iterexp::schroeder::GridQuantity::exp_iter;
    iterexp::schroeder::SchroederConfig config;
    config.branch.beta = opt.beta;
    config.r0 = opt.r0;
    auto ctx = iterexp::schroeder::make_context(config);
    auto cells = iterexp::schroeder::domain_grid(spec, ctx, thread_cap());

    auto out = open_output(opt.out_path);
    out << "re,im,out_re,out_im,flag\n";
    for (const auto& cell : cells) {
        out << iterexp::io::format_double(cell.z.real()) << ","
            << iterexp::io::format_double(cell.z.imag()) << ","
            << iterexp::io::format_double(cell.value.real()) << ","
            << iterexp::io::format_double(cell.value.imag()) << ","
            << iterexp::to_string(cell.flag) << "\n";
    }
    std::cout << "wrote " << cells.size() << " cells to " << opt.out_path << "\n";
    return kExitOk;
}

// -------------------------------------------------------------- interp ----

struct InterpOptions {
    std::string x_text = "2", y_text = "7";
    int samples = 1001;
    double beta = -0.5;
    double r0 = 1e-6;
    std::string out_path = "curve.csv";
};

int run_interp(const InterpOptions& opt) {
    if (opt.samples < 2) throw UsageError("interp: --samples must be >= 2");
    Complex x = parse_complex_arg(opt.x_text);
    Complex y = parse_complex_arg(opt.y_text);

    iterexp::schroeder::SchroederConfig config;
    config.branch.beta = opt.beta;
    config.r0 = opt.r0;
    Backend abel = Backend::abel();
    Backend schroeder = Backend::schroeder(config);

    auto abel_curve = iterexp::interpolation_curve(x, y, opt.samples, abel);
    auto schroeder_curve = iterexp::interpolation_curve(x, y, opt.samples, schroeder);

    auto out = open_output(opt.out_path);
    out << "backend,n,value_re,value_im,flag\n";
    auto dump = [&out](const char* name, const iterexp::InterpolationCurve& curve) {
        for (const auto& s : curve.samples) {
            out << name << "," << iterexp::io::format_double(s.n) << ","
                << iterexp::io::format_double(s.value.real()) << ","
                << iterexp::io::format_double(s.value.imag()) << ","
                << iterexp::to_string(s.flag) << "\n";
        }
    };
    dump("abel", abel_curve);
    dump("schroeder", schroeder_curve);

    json summary;
    summary["abel_max"] = abel_curve.max_abs;
    summary["abel_n_at_max"] = abel_curve.n_at_max;
    summary["schroeder_max"] = schroeder_curve.max_abs;
    summary["schroeder_n_at_max"] = schroeder_curve.n_at_max;
    std::cout << "abel:      max |value| = " << abel_curve.max_abs << " at n = "
              << abel_curve.n_at_max << "\n"
              << "schroeder: max |value| = " << schroeder_curve.max_abs << " at n = "
              << schroeder_curve.n_at_max << "\n"
              << summary.dump() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------ gradcheck ----

struct GradcheckOptions {
    std::string layer = "split";
    std::string sigma = "identity";
    std::string backend = "schroeder";
    int in_dim = 3;
    int out_dim = 2;
    unsigned seed = 42;
    bool corrupt = false; // harness self-test hook
};

int run_gradcheck(const GradcheckOptions& opt) {
    std::mt19937 rng(opt.seed);
    iterexp::nn::TransferKind sigma = opt.sigma == "logistic"
                                          ? iterexp::nn::TransferKind::logistic
                                          : iterexp::nn::TransferKind::identity;
    Backend backend =
        opt.backend == "abel" ? Backend::abel() : Backend::schroeder();

    iterexp::nn::Layer layer = [&]() -> iterexp::nn::Layer {
        auto W = iterexp::nn::random_init(opt.out_dim, opt.in_dim, rng);
        if (opt.layer == "additive") return iterexp::nn::AdditiveLayer{std::move(W), sigma};
        if (opt.layer == "product") return iterexp::nn::ProductLayer{std::move(W)};
        std::uniform_real_distribution<double> ndist(-1.0, 1.0);
        if (opt.layer == "addiplication") {
            std::vector<double> n(opt.out_dim);
            for (auto& v : n) v = ndist(rng);
            return iterexp::nn::AddiplicationLayer{std::move(W), std::move(n), sigma, backend};
        }
        if (opt.layer == "split") {
            std::vector<double> n_hat(opt.out_dim), n_tilde(opt.in_dim);
            for (auto& v : n_hat) v = ndist(rng);
            for (auto& v : n_tilde) v = ndist(rng);
            return iterexp::nn::SplitIterateLayer{std::move(W), std::move(n_hat),
                                                  std::move(n_tilde), sigma, backend};
        }
        throw UsageError("gradcheck: unknown layer kind " + opt.layer);
    }();

    // Positive real-ish inputs keep random draws clear of the singular set.
    std::uniform_real_distribution<double> re_dist(0.5, 2.5);
    std::uniform_real_distribution<double> im_dist(-0.3, 0.3);
    std::vector<Complex> x(opt.in_dim);
    bool abel_like = opt.backend == "abel" || opt.layer == "additive" || opt.layer == "product";
    for (auto& v : x) v = Complex{re_dist(rng), abel_like ? 0.0 : im_dist(rng)};

    // Iterate-based layers carry ~1e-9 relative evaluation noise, so their
    // difference quotients need the larger step.
    bool iterate_layer = opt.layer == "addiplication" || opt.layer == "split";
    double eps = iterate_layer && opt.backend != "abel" ? 1e-4 : 1e-6;
    auto report = iterexp::nn::grad_check(layer, x, opt.seed + 1, eps);
    if (opt.corrupt && !report.entries.empty()) {
        auto& e = report.entries.front();
        e.analytic += 1.0; // deliberately wrong; the check below must fail
        e.rel_error = std::abs(e.analytic - e.numeric) /
                      std::max({std::abs(e.analytic), std::abs(e.numeric), 1e-12});
        report.worst_rel_error = std::max(report.worst_rel_error, e.rel_error);
    }

    constexpr double tol = 1e-4;
    std::cout << "parameter            analytic        numeric         rel_error\n";
    for (const auto& e : report.entries) {
        std::cout << e.parameter;
        for (size_t pad = e.parameter.size(); pad < 21; ++pad) std::cout << ' ';
        if (e.singular) {
            std::cout << "singular (skipped)\n";
        } else {
            std::cout << e.analytic << "  " << e.numeric << "  " << e.rel_error << "\n";
        }
    }
    std::cout << "worst rel_error = " << report.worst_rel_error << " (tolerance " << tol
              << "), singular entries: " << report.singular_count << "\n";
    if (!report.pass(tol)) {
        std::cout << "FAIL\n";
        return kExitCheckFailed;
    }
    std::cout << "PASS\n";
    return kExitOk;
}

// ---------------------------------------------------------------- shift ----

struct ShiftOptions {
    int N = 8;
    std::string mode = "analytic";
    uint64_t seed = 1;
    int epochs = 200;
    double lr = 0.05;
    int trials = 1;
    int instances = 100;
    bool exhaustive = false;
    std::string out_path;
    std::string trace_csv;
};

json instance_json(const iterexp::shift::ShiftInstance& inst) {
    return json{{"x", inst.x}, {"m", inst.m}, {"s", inst.s}, {"y", inst.y}};
}

int run_shift(const ShiftOptions& opt) {
    json out;
    out["N"] = opt.N;
    out["mode"] = opt.mode;

    if (opt.mode == "analytic") {
        if (opt.N < 1 || opt.N > 32) {
            std::cerr << "shift: analytic mode supports 1 <= N <= 32\n";
            return kExitNumeric;
        }
        auto net = iterexp::shift::build_analytic_network(opt.N);
        double max_err = 0.0, max_imag = 0.0;
        json dumps = json::array();
        auto consider = [&](const iterexp::shift::ShiftInstance& inst) {
            auto eval = iterexp::shift::evaluate_analytic(net, inst);
            max_err = std::max(max_err, eval.max_abs_error);
            max_imag = std::max(max_imag, eval.max_imag);
            if (dumps.size() < 256) {
                json d = instance_json(inst);
                d["output"] = eval.output;
                d["max_abs_error"] = eval.max_abs_error;
                dumps.push_back(std::move(d));
            }
        };

        int count = 0;
        if (opt.exhaustive) {
            if (opt.N > 8) {
                std::cerr << "shift: --exhaustive supports N <= 8\n";
                return kExitNumeric;
            }
            for (int bits = 0; bits < (1 << opt.N); ++bits) {
                std::vector<int> x(opt.N);
                for (int i = 0; i < opt.N; ++i) x[i] = (bits >> i) & 1;
                for (int m = 0; m < opt.N; ++m) {
                    consider(iterexp::shift::make_instance(x, m));
                    ++count;
                }
            }
        } else {
            for (int i = 0; i < opt.instances; ++i) {
                consider(iterexp::shift::generate_instance(opt.N, opt.seed + i));
                ++count;
            }
        }
        out["instances"] = count;
        out["max_abs_error"] = max_err;
        out["max_imag"] = max_imag;
        out["results"] = std::move(dumps);
        std::cout << "analytic shift network, N = " << opt.N << ", " << count
                  << " instances: max abs error = " << max_err << "\n";
    } else if (opt.mode == "train") {
        if (opt.N < 1 || opt.N > 8) {
            std::cerr << "shift: train mode supports 1 <= N <= 8\n";
            return kExitNumeric;
        }
        auto result = iterexp::shift::train_on_shift_task(opt.N, opt.trials, opt.epochs, opt.lr,
                                                          opt.seed);
        out["trials"] = opt.trials;
        out["epochs"] = opt.epochs;
        out["learning_rate"] = opt.lr;
        out["initial_loss"] = result.initial_loss;
        out["final_loss"] = result.final_loss;
        out["improved_trials"] = result.improved_trials;
        out["n_hat_movement"] = result.n_hat_movement;
        out["n_tilde_movement"] = result.n_tilde_movement;
        json traces = json::array();
        for (const auto& t : result.traces) traces.push_back(t.loss);
        out["loss_traces"] = std::move(traces);
        std::cout << "trained " << opt.trials << " trial(s), improved " << result.improved_trials
                  << "/" << opt.trials << "; loss " << result.initial_loss.front() << " -> "
                  << result.final_loss.front() << " (trial 0)\n";
        if (!opt.trace_csv.empty()) {
            auto csv = open_output(opt.trace_csv);
            csv << "epoch,loss,skipped_samples\n";
            const auto& t = result.traces.front();
            for (size_t e = 0; e < t.loss.size(); ++e)
                csv << e << "," << iterexp::io::format_double(t.loss[e]) << "," << t.skipped[e]
                    << "\n";
        }
    } else {
        throw UsageError("shift: --mode must be analytic or train");
    }

    if (!opt.out_path.empty()) {
        auto f = open_output(opt.out_path);
        f << out.dump(2) << "\n";
    } else {
        std::cout << out.dump() << "\n";
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-integer iterates of exp, the addiplication operator, and "
                 "layers that learn to add or multiply"};
    app.require_subcommand(1);

    EvalOptions eval_opt;
    auto* eval = app.add_subcommand("eval", "evaluate exp^(n) and its derivatives at a point");
    eval->add_option("--x", eval_opt.x_text, "real argument (Abel backend)");
    eval->add_option("--z", eval_opt.z_text, "complex argument a+bi (Schroeder backend)");
    eval->add_option("--n", eval_opt.n, "iterate order")->required();
    eval->add_option("--backend", eval_opt.backend, "abel|schroeder (default: from --x/--z)")
        ->check(CLI::IsMember({"auto", "abel", "schroeder"}));
    eval->add_option("--beta", eval_opt.beta, "log branch parameter");
    eval->add_option("--r0", eval_opt.r0, "local-solution radius");

    GridOptions grid_opt;
    auto* grid = app.add_subcommand("grid", "export chi or exp^(n) over a complex rectangle");
    grid->add_option("--re-min", grid_opt.spec.re_min);
    grid->add_option("--re-max", grid_opt.spec.re_max);
    grid->add_option("--im-min", grid_opt.spec.im_min);
    grid->add_option("--im-max", grid_opt.spec.im_max);
    grid->add_option("--res-re", grid_opt.spec.n_re, "samples along the real axis");
    grid->add_option("--res-im", grid_opt.spec.n_im, "samples along the imaginary axis");
    grid->add_option("--quantity", grid_opt.quantity)->check(CLI::IsMember({"chi", "exp_iter"}));
    grid->add_option("--n", grid_opt.spec.n, "iterate order for exp_iter");
    grid->add_option("--beta", grid_opt.beta);
    grid->add_option("--r0", grid_opt.r0);
    grid->add_option("--out", grid_opt.out_path, "output CSV path");

    InterpOptions interp_opt;
    auto* interp =
        app.add_subcommand("interp", "addiplication curve x (+)_n y for n in [0,1], both backends");
    interp->add_option("--x", interp_opt.x_text)->required();
    interp->add_option("--y", interp_opt.y_text)->required();
    interp->add_option("--samples", interp_opt.samples);
    interp->add_option("--beta", interp_opt.beta);
    interp->add_option("--r0", interp_opt.r0);
    interp->add_option("--out", interp_opt.out_path, "output CSV path");

    GradcheckOptions gc_opt;
    auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of layer gradients");
    gradcheck->add_option("--layer", gc_opt.layer)
        ->check(CLI::IsMember({"additive", "product", "addiplication", "split"}));
    gradcheck->add_option("--sigma", gc_opt.sigma)->check(CLI::IsMember({"identity", "logistic"}));
    gradcheck->add_option("--backend", gc_opt.backend)->check(CLI::IsMember({"abel", "schroeder"}));
    gradcheck->add_option("--in", gc_opt.in_dim)->check(CLI::PositiveNumber);
    gradcheck->add_option("--out-dim", gc_opt.out_dim)->check(CLI::PositiveNumber);
    gradcheck->add_option("--seed", gc_opt.seed);
    gradcheck->add_flag("--corrupt", gc_opt.corrupt)->group(""); // self-test hook, hidden

    ShiftOptions shift_opt;
    auto* shift = app.add_subcommand("shift", "variable pattern-shift demo");
    shift->add_option("--n", shift_opt.N, "pattern length N")->required();
    shift->add_option("--mode", shift_opt.mode)->check(CLI::IsMember({"analytic", "train"}));
    shift->add_option("--seed", shift_opt.seed);
    shift->add_option("--epochs", shift_opt.epochs);
    shift->add_option("--lr", shift_opt.lr);
    shift->add_option("--trials", shift_opt.trials);
    shift->add_option("--instances", shift_opt.instances, "random instances in analytic mode");
    shift->add_flag("--exhaustive", shift_opt.exhaustive, "all patterns and shifts (N <= 8)");
    shift->add_option("--out", shift_opt.out_path, "write results JSON here");
    shift->add_option("--trace-csv", shift_opt.trace_csv, "loss trace CSV (trial 0)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (eval->parsed()) return run_eval(eval_opt);
        if (grid->parsed()) return run_grid(grid_opt);
        if (interp->parsed()) return run_interp(interp_opt);
        if (gradcheck->parsed()) return run_gradcheck(gc_opt);
        if (shift->parsed()) return run_shift(shift_opt);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const iterexp::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitUsage;
}
