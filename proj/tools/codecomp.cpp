// codecomp: learn compositional codes for an embedding matrix, export and
// reconstruct them, and report storage and quality figures.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "codecomp/analysis.hpp"
#include "codecomp/checkpoint.hpp"
#include "codecomp/codec.hpp"
#include "codecomp/embedding_io.hpp"
#include "codecomp/trainer.hpp"

namespace fs = std::filesystem;
using namespace codecomp;

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kData = 3, kNumeric = 4 };

struct Globals {
    bool quiet = false;
    unsigned threads = 1;
    std::string format = "text";
};

void emit(const Report& r, const Globals& g) { std::cout << (g.format == "tsv" ? r.tsv() : r.text()); }

void log(const Globals& g, const std::string& msg) {
    if (!g.quiet) std::cerr << msg << '\n';
}

/// Output paths must land in an existing directory.
const CLI::Validator kWritablePath(
    [](std::string& p) -> std::string {
        const fs::path parent = fs::path(p).parent_path();
        if (!parent.empty() && !fs::is_directory(parent)) return "directory does not exist: " + parent.string();
        if (fs::is_directory(p)) return "path is a directory: " + p;
        return {};
    },
    "WRITABLE");

// ------------------------------------------------------------------ train

struct TrainOpts {
    std::string emb, out;
    std::uint32_t M = 0, K = 0;
    double tau = 1.0;
    std::uint64_t iters = 200000;
    std::size_t batch = 128;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    std::uint64_t validate_every = 1000;
    double val_fraction = 0.05;
    std::optional<std::size_t> limit;
};

int run_train(const TrainOpts& o, const Globals& g, bool validate_every_given) {
    EmbeddingMatrix emb = read_embeddings(o.emb, o.limit);
    TrainConfig tc;
    tc.scheme = SchemeConfig{o.M, o.K, emb.dim(), o.tau};
    tc.batch_size = o.batch;
    tc.lr = o.lr;
    tc.iterations = o.iters;
    tc.validate_every = o.validate_every;
    if (!validate_every_given && o.iters > 0 && o.iters < o.validate_every) tc.validate_every = o.iters;
    tc.seed = o.seed;
    tc.val_fraction = o.val_fraction;
    tc.threads = g.threads;
    tc.validate();
    log(g, "training " + std::to_string(o.M) + "x" + std::to_string(o.K) + " codes for " +
               std::to_string(emb.size()) + " words, H=" + std::to_string(emb.dim()));

    auto hook = [&](const ValidationPoint& p, bool improved, const ModelParams<float>& best) {
        log(g, "iter " + std::to_string(p.iteration) + "  val_loss " + format_double(p.loss) +
                   (improved ? "  (saved)" : ""));
        if (improved) write_checkpoint(o.out, Checkpoint{tc.scheme, best, p.iteration});
    };
    TrainResult res = train(emb, tc, hook);
    write_checkpoint(o.out, Checkpoint{tc.scheme, res.params, res.report.best_iteration});

    Report r("training report");
    r.add("M", o.M).add("K", o.K).add("H", emb.dim()).add("vocab_size", static_cast<std::uint64_t>(emb.size()));
    r.add("iterations_run", res.report.iterations_run)
        .add("best_iteration", res.report.best_iteration)
        .add("best_val_loss", res.report.best_val_loss)
        .add("validations", static_cast<std::uint64_t>(res.report.val_loss_history.size()))
        .add("wall_seconds", res.report.wall_seconds)
        .add("checkpoint", o.out);
    emit(r, g);
    return kOk;
}

// ------------------------------------------------------------------ export

int run_export(const std::string& ckpt_path, const std::string& emb_path, const std::string& codes_path,
               const std::string& books_path, bool sample_noise, std::uint64_t seed, const Globals& g) {
    const Checkpoint ckpt = read_checkpoint(ckpt_path);
    const EmbeddingMatrix emb = read_embeddings(emb_path);
    if (emb.size() > 0 && emb.dim() != ckpt.scheme.H) {
        throw ConfigError("checkpoint H = " + std::to_string(ckpt.scheme.H) + " but embeddings have H = " +
                          std::to_string(emb.dim()));
    }
    Rng rng(seed);
    auto [codes, books] = export_codes(ckpt.params, ckpt.scheme, emb, sample_noise ? &rng : nullptr);
    write_code_file(codes_path, codes, emb.vocab);
    write_codebooks(books_path, books);

    Report r("export");
    r.add("M", codes.M).add("K", codes.K).add("H", books.dim())
        .add("vocab_size", static_cast<std::uint64_t>(codes.vocab_size()))
        .add("bytes_per_word", static_cast<std::uint64_t>(codes.bytes_per_word()))
        .add("codes", codes_path)
        .add("books", books_path);
    emit(r, g);
    return kOk;
}

// ------------------------------------------------------------------ reconstruct

int run_reconstruct(const std::string& codes_path, const std::string& books_path, const std::string& out,
                    const std::string& out_format, const std::string& ref, bool per_word, const Globals& g) {
    const CodeFile cf = read_code_file(codes_path);
    const Codebooks books = read_codebooks(books_path);
    const EmbeddingMatrix recon = reconstruct_all(cf.codes, books, cf.vocab);
    if (out_format == "binary") {
        write_binary_embeddings(recon, out);
    } else {
        write_text_embeddings(recon, out);
    }
    Report r("reconstruct");
    r.add("vocab_size", static_cast<std::uint64_t>(recon.size())).add("H", books.dim()).add("out", out);
    if (!ref.empty()) {
        const EmbeddingMatrix original = read_embeddings(ref);
        if (original.vocab != recon.vocab) throw DataError("--ref vocabulary differs from the code file's");
        const auto q = reconstruction_quality(original.matrix, recon.matrix);
        r.add("mean_squared_distance", q.mean_squared_distance)
            .add("mean_cosine", q.mean_cosine)
            .add("min_cosine", q.min_cosine);
        if (per_word) {
            for (std::size_t w = 0; w < q.cosine.size(); ++w) r.add("cosine:" + recon.vocab[w], q.cosine[w]);
        }
    }
    emit(r, g);
    return kOk;
}

// ------------------------------------------------------------------ analysis commands

int run_stats(const std::string& codes_path, const std::string& books_path, const std::string& emb_path,
              const Globals& g) {
    const CodeFile cf = read_code_file(codes_path);
    const Codebooks books = read_codebooks(books_path);
    const EmbeddingMatrix recon = reconstruct_all(cf.codes, books, cf.vocab);
    Report r("code statistics");
    r.add("M", cf.codes.M).add("K", cf.codes.K).add("H", books.dim())
        .add("vocab_size", static_cast<std::uint64_t>(cf.codes.vocab_size()))
        .add("distinct_codes", static_cast<std::uint64_t>(distinct_codes(cf.codes)));
    const auto bal = balance_table(cf.codes);
    r.add("min_subcode_count", bal.min_count).add("max_subcode_count", bal.max_count)
        .add("dead_codewords", bal.dead_codewords);
    if (!emb_path.empty()) {
        const EmbeddingMatrix original = read_embeddings(emb_path);
        if (original.vocab != recon.vocab) throw DataError("--emb vocabulary differs from the code file's");
        const auto q = reconstruction_quality(original.matrix, recon.matrix);
        r.add("mean_squared_distance", q.mean_squared_distance)
            .add("mean_cosine", q.mean_cosine)
            .add("min_cosine", q.min_cosine);
    }
    emit(r, g);
    return kOk;
}

int run_balance(const std::string& codes_path, const std::string& csv, const Globals& g) {
    const CodeFile cf = read_code_file(codes_path);
    const BalanceTable t = balance_table(cf.codes);
    emit(to_report(t), g);
    if (csv == "-") {
        std::cout << to_csv(t);
    } else if (!csv.empty()) {
        std::ofstream out(csv, std::ios::trunc);
        if (!out) throw DataError("cannot open for writing: " + csv);
        out << to_csv(t);
    }
    return kOk;
}

int run_shared(const std::string& codes_path, std::size_t top, const Globals& g) {
    const CodeFile cf = read_code_file(codes_path);
    const auto groups = shared_code_groups(cf.codes, cf.vocab);
    std::size_t words = 0;
    for (const auto& grp : groups) words += grp.indices.size();
    Report r("shared codes");
    r.add("groups", static_cast<std::uint64_t>(groups.size()))
        .add("words_in_groups", static_cast<std::uint64_t>(words))
        .add("distinct_codes", static_cast<std::uint64_t>(distinct_codes(cf.codes)));
    emit(r, g);
    const std::size_t n = top == 0 ? groups.size() : std::min(top, groups.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::cout << groups[i].indices.size() << '\t';
        for (std::size_t c = 0; c < groups[i].code.size(); ++c) std::cout << (c ? " " : "") << groups[i].code[c];
        std::cout << '\t';
        for (std::size_t w = 0; w < groups[i].words.size(); ++w) std::cout << (w ? " " : "") << groups[i].words[w];
        std::cout << '\n';
    }
    return kOk;
}

int run_pq(const std::string& emb_path, std::uint32_t M, std::uint32_t K, unsigned iters, std::uint64_t seed,
           const std::string& codes_out, const std::string& books_out, const Globals& g) {
    const EmbeddingMatrix emb = read_embeddings(emb_path);
    const PqResult pq = pq_baseline(emb, M, K, iters, seed);
    if (!codes_out.empty()) write_code_file(codes_out, pq.codes, emb.vocab);
    if (!books_out.empty()) write_codebooks(books_out, pq.books);
    Report r("product quantization baseline");
    r.add("M", M).add("K", K).add("H", emb.dim()).add("vocab_size", static_cast<std::uint64_t>(emb.size()))
        .add("kmeans_iterations", static_cast<std::uint64_t>(pq.loss_history.size() - 1))
        .add("loss", pq.loss);
    emit(r, g);
    return kOk;
}

int run_nn_overlap(const std::string& emb_path, const std::string& recon_path, const std::string& codes_path,
                   const std::string& books_path, std::size_t k, std::size_t sample, std::uint64_t seed,
                   const Globals& g) {
    const EmbeddingMatrix original = read_embeddings(emb_path);
    EmbeddingMatrix recon;
    if (!recon_path.empty()) {
        recon = read_embeddings(recon_path);
    } else if (!codes_path.empty() && !books_path.empty()) {
        const CodeFile cf = read_code_file(codes_path);
        recon = reconstruct_all(cf.codes, read_codebooks(books_path), cf.vocab);
    } else {
        throw ConfigError("nn-overlap needs --recon or both --codes and --books");
    }
    const auto res = neighbor_overlap(original, recon, k, sample, seed);
    Report r("nearest-neighbour overlap");
    r.add("k", static_cast<std::uint64_t>(k))
        .add("queries", static_cast<std::uint64_t>(res.queries.size()))
        .add("overlap", res.overlap);
    emit(r, g);
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Compositional code learning for embedding compression"};
    app.require_subcommand(1, 1);
    app.fallthrough();
    Globals g;
    app.add_flag("-q,--quiet", g.quiet, "Suppress progress logging on stderr");
    app.add_option("--threads", g.threads, "Worker threads (data-parallel training)")
        ->envname("CODECOMP_THREADS")
        ->check(CLI::Range(1u, 1024u));
    app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"text", "tsv"}));

    // train
    TrainOpts to;
    auto* train_cmd = app.add_subcommand("train", "Learn codes and codebooks; writes a checkpoint");
    train_cmd->add_option("--emb", to.emb, "Baseline embeddings (text or DEM1 binary)")->required()->check(CLI::ExistingFile);
    train_cmd->add_option("--M", to.M, "Number of codebooks")->required()->check(CLI::PositiveNumber);
    train_cmd->add_option("--K", to.K, "Codewords per codebook (power of two)")->required()->check(CLI::PositiveNumber);
    train_cmd->add_option("--tau", to.tau, "Softmax temperature")->capture_default_str();
    train_cmd->add_option("--iters", to.iters, "Training iterations")->capture_default_str();
    train_cmd->add_option("--batch", to.batch, "Batch size")->capture_default_str();
    train_cmd->add_option("--lr", to.lr, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--seed", to.seed, "Random seed")->envname("CODECOMP_SEED")->capture_default_str();
    auto* ve_opt = train_cmd->add_option("--validate-every", to.validate_every, "Validation cadence")->capture_default_str();
    train_cmd->add_option("--val-fraction", to.val_fraction, "Validation share of the vocabulary")->capture_default_str();
    train_cmd->add_option("--limit", to.limit, "Only read the first N embedding lines");
    train_cmd->add_option("--out", to.out, "Checkpoint path")->required()->check(kWritablePath);

    // export
    std::string ckpt_path, emb_path, codes_path, books_path, out_path, ref_path, recon_path, csv_path;
    bool sample_noise = false, per_word = false;
    std::uint64_t seed = 0;
    auto* export_cmd = app.add_subcommand("export", "Write hard codes and codebooks from a checkpoint");
    export_cmd->add_option("--checkpoint", ckpt_path)->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--emb", emb_path)->required()->check(CLI::ExistingFile);
    export_cmd->add_option("--codes", codes_path, "Output code file")->required()->check(kWritablePath);
    export_cmd->add_option("--books", books_path, "Output codebook file")->required()->check(kWritablePath);
    export_cmd->add_flag("--sample-noise", sample_noise, "Add Gumbel noise before argmax (experimental)");
    export_cmd->add_option("--seed", seed, "Noise seed for --sample-noise")->envname("CODECOMP_SEED");

    // reconstruct
    std::string out_format = "text";
    auto* recon_cmd = app.add_subcommand("reconstruct", "Compose embeddings from codes and codebooks");
    recon_cmd->add_option("--codes", codes_path)->required()->check(CLI::ExistingFile);
    recon_cmd->add_option("--books", books_path)->required()->check(CLI::ExistingFile);
    recon_cmd->add_option("--out", out_path)->required()->check(kWritablePath);
    recon_cmd->add_option("--out-format", out_format)->check(CLI::IsMember({"text", "binary"}))->capture_default_str();
    recon_cmd->add_option("--ref", ref_path, "Original embeddings; adds cosine/distance figures")->check(CLI::ExistingFile);
    recon_cmd->add_flag("--per-word", per_word, "With --ref, report every word's cosine");

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Code usage and reconstruction quality");
    stats_cmd->add_option("--codes", codes_path)->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("--books", books_path)->required()->check(CLI::ExistingFile);
    stats_cmd->add_option("--emb", emb_path, "Original embeddings")->check(CLI::ExistingFile);

    // balance
    auto* balance_cmd = app.add_subcommand("balance", "Per-component subcode counts");
    balance_cmd->add_option("--codes", codes_path)->required()->check(CLI::ExistingFile);
    balance_cmd->add_option("--csv", csv_path, "Write the M x K count table as CSV ('-' for stdout)");

    // shared
    std::size_t top = 0;
    auto* shared_cmd = app.add_subcommand("shared", "Words sharing an identical code");
    shared_cmd->add_option("--codes", codes_path)->required()->check(CLI::ExistingFile);
    shared_cmd->add_option("--top", top, "Print only the N largest groups (0 = all)");

    // size
    std::uint32_t sM = 0, sK = 0, sH = 300;
    std::uint64_t vocab = 0;
    auto* size_cmd = app.add_subcommand("size", "Storage accounting for a coding scheme");
    size_cmd->add_option("--M", sM)->required()->check(CLI::PositiveNumber);
    size_cmd->add_option("--K", sK)->required()->check(CLI::PositiveNumber);
    size_cmd->add_option("--vocab", vocab)->required();
    size_cmd->add_option("--H", sH, "Embedding dimension")->capture_default_str();

    // pq
    std::uint32_t pM = 0, pK = 0;
    unsigned pq_iters = kDefaultKMeansIterations;
    auto* pq_cmd = app.add_subcommand("pq", "Product-quantization baseline");
    pq_cmd->add_option("--emb", emb_path)->required()->check(CLI::ExistingFile);
    pq_cmd->add_option("--M", pM)->required()->check(CLI::PositiveNumber);
    pq_cmd->add_option("--K", pK)->required()->check(CLI::PositiveNumber);
    pq_cmd->add_option("--iters", pq_iters, "k-means iteration cap")->capture_default_str();
    pq_cmd->add_option("--seed", seed)->envname("CODECOMP_SEED");
    pq_cmd->add_option("--codes", codes_path, "Optional code file output")->check(kWritablePath);
    pq_cmd->add_option("--books", books_path, "Optional codebook file output")->check(kWritablePath);

    // nn-overlap
    std::size_t nn_k = 10, nn_sample = 100;
    auto* nn_cmd = app.add_subcommand("nn-overlap", "Top-k cosine neighbour overlap with the original space");
    nn_cmd->add_option("--emb", emb_path)->required()->check(CLI::ExistingFile);
    nn_cmd->add_option("--recon", recon_path, "Reconstructed embeddings")->check(CLI::ExistingFile);
    nn_cmd->add_option("--codes", codes_path)->check(CLI::ExistingFile);
    nn_cmd->add_option("--books", books_path)->check(CLI::ExistingFile);
    nn_cmd->add_option("--k", nn_k)->capture_default_str();
    nn_cmd->add_option("--sample", nn_sample)->capture_default_str();
    nn_cmd->add_option("--seed", seed)->envname("CODECOMP_SEED");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        std::cerr << sub->help();
        return kConfig;
    }

    try {
        if (*train_cmd) return run_train(to, g, ve_opt->count() > 0);
        if (*export_cmd) return run_export(ckpt_path, emb_path, codes_path, books_path, sample_noise, seed, g);
        if (*recon_cmd) return run_reconstruct(codes_path, books_path, out_path, out_format, ref_path, per_word, g);
        if (*stats_cmd) return run_stats(codes_path, books_path, emb_path, g);
        if (*balance_cmd) return run_balance(codes_path, csv_path, g);
        if (*shared_cmd) return run_shared(codes_path, top, g);
        if (*size_cmd) {
            emit(to_report(size_report(SchemeConfig{sM, sK, sH, 1.0}, vocab)), g);
            return kOk;
        }
        if (*pq_cmd) return run_pq(emb_path, pM, pK, pq_iters, seed, codes_path, books_path, g);
        if (*nn_cmd) return run_nn_overlap(emb_path, recon_path, codes_path, books_path, nn_k, nn_sample, seed, g);
    } catch (const ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}
