#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcic/config.hpp"

namespace pcic {

class PipelineError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct StageResult {
    std::string stage;
    std::vector<std::string> outputs;             // files written, workdir-relative
    std::map<std::string, std::string> stats;     // also stamped into the manifest
};

/// Stage names in their natural order: synth, ingest, split, featurize,
/// train, score, recommend, evaluate, importance.
const std::vector<std::string>& stage_names();

/// Runs one stage. Every stage reads its inputs from paths.workdir (ingest
/// reads paths.input; synth writes it), writes its artifacts there, and drops
/// a `<stage>.manifest` recording the effective config plus output stats; the
/// manifest is itself a loadable config file. A missing prerequisite raises
/// PipelineError naming the stage that produces it.
StageResult run_stage(const std::string& stage, const Config& config);

}  // namespace pcic
