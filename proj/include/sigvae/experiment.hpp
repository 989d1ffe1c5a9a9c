// Experiment orchestration: JSON configuration with named presets, the
// seeded training loop, parallel sweeps with mean/SEM aggregation, corpus
// analysis with plot-data emission, and the self-check suite behind the
// `verify` subcommand.
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "sigvae/agents.hpp"
#include "sigvae/game.hpp"
#include "sigvae/metrics.hpp"
#include "sigvae/nn.hpp"
#include "sigvae/objectives.hpp"

namespace sigvae::exp {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kOutRootEnvVar = "SIGVAE_OUT";

struct ExperimentConfig {
    game::GameConfig game;
    game::ObjectDistKind object_dist = game::ObjectDistKind::uniform;
    objectives::ObjectiveSpec objective;
    agents::ModelSizes model;
    nn::AdamConfig optim;
    int batch_size = 256;
    int updates = 3000;
    metrics::MetricsOptions metrics;
    int zla_window = 10;
    std::string out_dir = "runs";
    std::vector<std::uint64_t> seeds = {0};

    void validate() const;
    nlohmann::json to_json() const;
    static ExperimentConfig from_json(const nlohmann::json& j);

    // Content hash of everything that shapes a run except the seed list.
    std::string config_hash() const;
};

// Built-in configurations: desk-scale presets sized for a laptop and
// paper-scale presets that validate but are not exercised by the test suite.
std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

class TrainDivergence : public std::runtime_error {
public:
    TrainDivergence(std::int64_t step, const std::string& what)
        : std::runtime_error("training diverged at step " + std::to_string(step) + ": " + what),
          step(step) {}
    std::int64_t step;
};

struct RunRecord {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string run_dir;
    std::string log_path;
    std::string checkpoint_path;
    std::string corpus_path;
    std::string metrics_path;
    metrics::MetricsReport report;
    double accuracy = 0.0;
    double final_beta = 0.0;
    double mean_message_length = 0.0;
    bool ok = false;
    std::string error;

    nlohmann::json to_json() const;
};

// Full training run: sample batches, roll out the sender, score with the
// receiver, assemble surrogate and baseline losses, Adam updates, beta
// annealing, per-step CSV logging, then greedy corpus dump, checkpoint,
// metrics row, and a run record. Deterministic given (config, seed).
RunRecord train(const ExperimentConfig& config, std::uint64_t seed);

struct SweepResult {
    std::vector<RunRecord> runs;
    std::string aggregate_path;
    std::string failures_path;
};

// configs x their seed lists, run with at most `parallelism` worker threads;
// failures are recorded and do not stop the sweep.
SweepResult sweep(const std::vector<ExperimentConfig>& configs, int parallelism);

struct AnalyzeOptions {
    metrics::MetricsOptions metrics;
    std::optional<game::ObjectDistKind> object_dist;  // enables the length-frequency curve
    int zla_window = 10;
    bool emit_svg = false;
};

struct AnalyzeResult {
    metrics::MetricsReport report;
    std::string report_path;
    std::string zla_path;  // empty when not computed
};

AnalyzeResult analyze(const std::string& corpus_path, const std::string& out_dir,
                      const AnalyzeOptions& options);

// Greedy corpus for every object from a checkpointed sender.
void dump_language_cmd(const ExperimentConfig& config, const std::string& checkpoint_path,
                       const std::string& corpus_out);

// Enumeration- and property-based self checks (closed forms vs brute force,
// prior normalization, gradient spot checks, objective equivalences).
// Returns true when everything passes; prints one line per check.
bool verify(std::ostream& out);

// Checkpoint bundling for the three parameter stores.
nn::ParamStore snapshot_params(const agents::Sender& s, const agents::Receiver& r,
                               const agents::Baseline& b);
void restore_params(agents::Sender& s, agents::Receiver& r, agents::Baseline& b,
                    const std::string& checkpoint_path);

// Root-relative output resolution honoring SIGVAE_OUT.
std::string resolve_out_dir(const std::string& out_dir);

// Deterministic text formatting for logs (shortest round-trip float form).
std::string format_double(double v);

}  // namespace sigvae::exp
