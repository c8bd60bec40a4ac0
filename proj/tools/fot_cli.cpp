#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fot/adapt.hpp"
#include "fot/estimator.hpp"
#include "fot/exact_ot.hpp"
#include "fot/factored_ot.hpp"
#include "fot/synthgen.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kSweepSchema = "# fot-sweep-csv v1";

struct CommonOpts {
    std::size_t k = 4;
    double epsilon = 0.1;
    double tol = 5e-7;
    int max_iter = 1000000;
    double outer_tol = 1e-6;
    int outer_max_iter = 200;
    std::uint64_t seed = 0;
    bool header = false;
    std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--k", o.k, "transport rank budget / number of hubs");
    cmd->add_option("--epsilon", o.epsilon, "entropic regularization");
    cmd->add_option("--tol", o.tol, "inner marginal tolerance");
    cmd->add_option("--max-iter", o.max_iter, "inner iteration cap");
    cmd->add_option("--outer-tol", o.outer_tol, "relative objective tolerance");
    cmd->add_option("--outer-max-iter", o.outer_max_iter, "outer iteration cap");
    cmd->add_option("--seed", o.seed, "random seed");
    cmd->add_flag("--header", o.header, "skip first CSV line");
    cmd->add_option("--config", o.config_path, "JSON config file mirroring the flags");
}

// Flags given on the command line win over the config file.
void apply_config(const CLI::App* cmd, CommonOpts& o) {
    if (o.config_path.empty()) return;
    std::ifstream in(o.config_path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + o.config_path);
    json j = json::parse(in);
    auto take = [&](const char* flag, const char* key, auto& field) {
        if (cmd->count(flag) == 0 && j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("--k", "k", o.k);
    take("--epsilon", "epsilon", o.epsilon);
    take("--tol", "tol", o.tol);
    take("--max-iter", "max_iter", o.max_iter);
    take("--outer-tol", "outer_tol", o.outer_tol);
    take("--outer-max-iter", "outer_max_iter", o.outer_max_iter);
    take("--seed", "seed", o.seed);
}

fot::FotConfig make_fot_config(const CommonOpts& o) {
    fot::FotConfig cfg;
    cfg.k = o.k;
    cfg.sinkhorn.epsilon = o.epsilon;
    cfg.sinkhorn.tol = o.tol;
    cfg.sinkhorn.max_iter = o.max_iter;
    cfg.outer_tol = o.outer_tol;
    cfg.outer_max_iter = o.outer_max_iter;
    cfg.seed = o.seed;
    return cfg;
}

std::size_t worker_count() {
    if (const char* env = std::getenv("FOT_THREADS")) {
        const long v = std::atol(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

fot::MeasurePair generate(const std::string& kind, std::size_t d, std::size_t n,
                          std::uint64_t seed) {
    if (kind == "hypercube") return fot::gen_hypercube_pair(d, n, seed);
    if (kind == "disk_annulus") return fot::gen_disk_annulus_pair(d, n, seed);
    throw CLI::ValidationError("--kind", "unknown generator: " + kind);
}

double estimate_once(const std::string& method, const fot::DiscreteMeasure& src,
                     const fot::DiscreteMeasure& tgt, const CommonOpts& opts,
                     bool* approx = nullptr) {
    if (approx) *approx = false;
    if (method == "fot") return fot::w_hat(src, tgt, make_fot_config(opts)).w_hat;
    if (method == "ot") {
        if (src.size() * tgt.size() <= fot::kDefaultExactCap)
            return fot::solve_exact(src, tgt).cost;
        // Too large for the exact solver; fall back to low-eps Sinkhorn and
        // mark the row.
        if (approx) {
            *approx = true;
            fot::SinkhornConfig sc;
            sc.epsilon = 1e-3;
            sc.tol = 1e-6;
            sc.max_iter = 100000;
            sc.epsilon_schedule = true;
            return fot::sinkhorn_plan(src, tgt, sc).transport_cost;
        }
        return fot::solve_exact(src, tgt).cost;  // throws CapacityError
    }
    if (method == "sinkhorn") {
        fot::SinkhornConfig sc;
        sc.epsilon = opts.epsilon;
        sc.tol = std::max(opts.tol, 1e-9);
        sc.max_iter = opts.max_iter;
        return fot::sinkhorn_plan(src, tgt, sc).transport_cost;
    }
    if (method == "kot") {
        const std::size_t d = src.dim();
        auto km0 = fot::kmeans(src.points(), src.weights(), d, opts.k, opts.seed);
        auto km1 = fot::kmeans(tgt.points(), tgt.weights(), d, opts.k, opts.seed + 1);
        std::vector<double> m0(opts.k, 0.0), m1(opts.k, 0.0);
        for (std::size_t i = 0; i < src.size(); ++i) m0[km0.assignment[i]] += src.weights()[i];
        for (std::size_t i = 0; i < tgt.size(); ++i) m1[km1.assignment[i]] += tgt.weights()[i];
        return fot::solve_exact(fot::DiscreteMeasure(km0.centers, m0, d),
                                fot::DiscreteMeasure(km1.centers, m1, d))
            .cost;
    }
    throw CLI::ValidationError("--method", "unknown method: " + method);
}

int cmd_gen(const std::string& kind, std::size_t d, std::size_t n,
            const CommonOpts& opts, const std::string& out, bool force,
            const std::string& centers, double sigma, double shift) {
    const fs::path src_path = out + "_source.csv";
    const fs::path tgt_path = out + "_target.csv";
    for (const auto& p : {src_path, tgt_path})
        if (fs::exists(p) && !force)
            throw CLI::ValidationError("--out", p.string() + " exists (use --force)");

    if (kind == "gaussian_mixture") {
        fot::MixtureSpec spec;
        spec.sigma = sigma;
        spec.n = n;
        std::istringstream comp(centers);
        std::string tok;
        while (std::getline(comp, tok, ';')) {
            std::vector<double> mean;
            std::istringstream cs(tok);
            std::string c;
            while (std::getline(cs, c, ',')) mean.push_back(std::stod(c));
            spec.means.push_back(std::move(mean));
        }
        if (spec.means.empty())
            throw CLI::ValidationError("--centers", "no component means given");
        auto src = fot::gen_gaussian_mixture(spec, opts.seed);
        fot::MixtureSpec tspec = spec;
        for (auto& m : tspec.means) m[0] += shift;
        auto tgt = fot::gen_gaussian_mixture(tspec, opts.seed + 1);
        fot::save_csv(src_path, src);
        fot::save_csv(tgt_path, tgt);
    } else {
        auto [src, tgt] = generate(kind, d, n, opts.seed);
        fot::save_csv(src_path, {src, {}});
        fot::save_csv(tgt_path, {tgt, {}});
    }
    std::cout << "wrote " << src_path.string() << " and " << tgt_path.string() << "\n";
    return 0;
}

int cmd_estimate(const std::string& src_path, const std::string& tgt_path,
                 const std::string& method, const CommonOpts& opts, bool with_plugin) {
    const auto src = fot::load_csv(src_path, false, opts.header).measure;
    const auto tgt = fot::load_csv(tgt_path, false, opts.header).measure;

    const auto t0 = std::chrono::steady_clock::now();
    const double estimate = estimate_once(method, src, tgt, opts);
    const auto t1 = std::chrono::steady_clock::now();

    fot::ResultRecord rec;
    rec.method = method;
    rec.k = opts.k;
    rec.epsilon = opts.epsilon;
    rec.seed = opts.seed;
    rec.w_hat = estimate;
    rec.runtime_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    rec.n0 = src.size();
    rec.n1 = tgt.size();
    rec.d = src.dim();
    if (with_plugin && method != "ot" &&
        src.size() * tgt.size() <= fot::kDefaultExactCap)
        rec.plug_in_cost = fot::solve_exact(src, tgt).cost;
    std::cout << rec.to_json() << "\n";
    return 0;
}

struct SweepCell {
    std::size_t value;
    std::string method;
    int replicate;
    std::uint64_t seed;
    double estimate = 0.0;
    double ground_truth = 0.0;
    bool has_truth = false;
    bool approx = false;
    double runtime_ms = 0.0;
    std::string status = "ok";
};

int cmd_sweep(const std::string& kind, const std::string& sweep_var,
              const std::vector<std::size_t>& values,
              const std::vector<std::string>& methods, int replicates, std::size_t d,
              std::size_t n, const CommonOpts& opts, const std::string& out,
              bool force) {
    if (fs::exists(out) && !force)
        throw CLI::ValidationError("--out", out + " exists (use --force)");

    double truth = 0.0;
    bool has_truth = false;
    if (kind == "hypercube") {
        truth = fot::kHypercubeGroundTruth;
        has_truth = true;
    } else if (kind == "disk_annulus") {
        truth = fot::disk_annulus_ground_truth();
        has_truth = true;
    }

    std::vector<SweepCell> cells;
    for (std::size_t v : values)
        for (const auto& m : methods)
            for (int r = 0; r < replicates; ++r)
                cells.push_back(SweepCell{v, m, r,
                                          opts.seed + static_cast<std::uint64_t>(r),
                                          0.0, truth, has_truth, false, 0.0, "ok"});

    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        while (true) {
            const std::size_t idx = next.fetch_add(1);
            if (idx >= cells.size()) return;
            SweepCell& c = cells[idx];
            std::size_t cd = d, cn = n, ck = opts.k;
            if (sweep_var == "n") cn = c.value;
            else if (sweep_var == "d") { cd = c.value; cn = 10 * c.value; }
            else if (sweep_var == "k") ck = c.value;
            try {
                auto [src, tgt] = generate(kind, cd, cn, c.seed);
                CommonOpts local = opts;
                local.k = ck;
                local.seed = c.seed;
                const auto t0 = std::chrono::steady_clock::now();
                c.estimate = estimate_once(c.method, src, tgt, local, &c.approx);
                const auto t1 = std::chrono::steady_clock::now();
                c.runtime_ms =
                    std::chrono::duration<double, std::milli>(t1 - t0).count();
            } catch (const std::exception& e) {
                c.status = std::string("error: ") + e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    const std::size_t nw = std::min(worker_count(), cells.size());
    for (std::size_t i = 0; i < nw; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    std::ofstream os(out);
    os << kSweepSchema << "\n";
    os << "sweep_var,sweep_value,method,replicate,seed,estimate,ground_truth,"
          "abs_error,approx,runtime_ms,status\n";
    os.precision(17);
    bool any_failed = false;
    for (const auto& c : cells) {
        os << sweep_var << ',' << c.value << ',' << c.method << ',' << c.replicate
           << ',' << c.seed << ',' << c.estimate << ',';
        if (c.has_truth)
            os << c.ground_truth << ',' << std::abs(c.estimate - c.ground_truth);
        else
            os << ',';
        os << ',' << (c.approx ? 1 : 0) << ',' << c.runtime_ms << ','
           << (c.status == "ok" ? "ok" : c.status) << "\n";
        if (c.status != "ok") any_failed = true;
    }
    std::cout << "wrote " << out << " (" << cells.size() << " rows)\n";
    return any_failed ? 1 : 0;
}

int cmd_adapt(const std::string& src_path, const std::string& tgt_path,
              const std::string& method, const CommonOpts& opts, std::size_t knn,
              const std::string& out, bool force) {
    const auto src = fot::load_csv(src_path, true, opts.header);
    const auto tgt = fot::load_csv(tgt_path, true, opts.header);

    fot::AdaptParams params;
    params.fot = make_fot_config(opts);
    params.sinkhorn = params.fot.sinkhorn;
    params.knn_k = knn;

    const auto res =
        fot::adapt_labels(src, tgt, fot::parse_adapt_method(method), params);

    if (!out.empty()) {
        if (fs::exists(out) && !force)
            throw CLI::ValidationError("--out", out + " exists (use --force)");
        std::ofstream os(out);
        os.precision(17);
        const auto& m = src.measure;
        for (std::size_t i = 0; i < m.size(); ++i) {
            auto p = m.point(i);
            for (std::size_t t = 0; t < m.dim(); ++t) os << p[t] << ',';
            os << src.labels[i] << ',' << res.predicted_labels[i] << "\n";
        }
    }
    json j;
    j["method"] = method;
    j["knn_k"] = knn;
    if (res.error_rate) j["error_rate"] = *res.error_rate;
    std::cout << j.dump() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transport-rank-regularized optimal transport toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string kind = "hypercube", method = "fot", out, src_path, tgt_path;
    std::string sweep_var = "n", centers = "0,0;5,0;10,0";
    std::vector<std::size_t> values;
    std::vector<std::string> methods{"fot"};
    std::size_t d = 2, n = 100, knn = 20;
    int replicates = 20;
    bool force = false, with_plugin = false;
    double sigma = 1.0, shift = 0.0;

    auto* gen = app.add_subcommand("gen", "generate synthetic source/target CSVs");
    gen->add_option("--kind", kind, "hypercube | disk_annulus | gaussian_mixture");
    gen->add_option("--d", d, "dimension");
    gen->add_option("--n", n, "points per sample");
    gen->add_option("--out", out, "output path prefix")->required();
    gen->add_flag("--force", force, "overwrite existing files");
    gen->add_option("--centers", centers, "mixture means, 'x,y;x,y;...'");
    gen->add_option("--sigma", sigma, "mixture std deviation");
    gen->add_option("--shift", shift, "target shift along first axis (mixture)");
    add_common(gen, opts);

    auto* est = app.add_subcommand("estimate", "estimate squared W2 between two CSVs");
    est->add_option("source", src_path, "source CSV")->required();
    est->add_option("target", tgt_path, "target CSV")->required();
    est->add_option("--method", method, "fot | ot | sinkhorn | kot");
    est->add_flag("--with-plugin", with_plugin, "also report the plug-in cost");
    add_common(est, opts);

    auto* swp = app.add_subcommand("sweep", "replicate experiment sweeps to CSV");
    swp->add_option("--generator", kind, "hypercube | disk_annulus");
    swp->add_option("--sweep", sweep_var, "n | d | k");
    swp->add_option("--values", values, "sweep values")->required()->delimiter(',');
    swp->add_option("--methods", methods, "subset of fot,ot,sinkhorn,kot")
        ->delimiter(',');
    swp->add_option("--replicates", replicates, "replicates per cell");
    swp->add_option("--d", d, "dimension");
    swp->add_option("--n", n, "points per sample");
    swp->add_option("--out", out, "output CSV")->required();
    swp->add_flag("--force", force, "overwrite existing files");
    add_common(swp, opts);

    auto* adp = app.add_subcommand("adapt", "label transfer via transport + kNN vote");
    adp->add_option("source", src_path, "labeled source CSV")->required();
    adp->add_option("target", tgt_path, "labeled target CSV")->required();
    adp->add_option("--method", method, "fot | ot | sinkhorn | kot | nn_only");
    adp->add_option("--knn", knn, "nearest neighbors for the vote");
    adp->add_option("--out", out, "write predictions CSV here");
    adp->add_flag("--force", force, "overwrite existing files");
    add_common(adp, opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            apply_config(gen, opts);
            return cmd_gen(kind, d, n, opts, out, force, centers, sigma, shift);
        }
        if (est->parsed()) {
            apply_config(est, opts);
            return cmd_estimate(src_path, tgt_path, method, opts, with_plugin);
        }
        if (swp->parsed()) {
            apply_config(swp, opts);
            return cmd_sweep(kind, sweep_var, values, methods, replicates, d, n, opts,
                             out, force);
        }
        if (adp->parsed()) {
            apply_config(adp, opts);
            return cmd_adapt(src_path, tgt_path, method, opts, knn, out, force);
        }
    } catch (const CLI::Error& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
