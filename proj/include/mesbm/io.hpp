#pragma once

#include <string>
#include <vector>

#include "mesbm/data_model.hpp"
#include "mesbm/pipeline.hpp"
#include "mesbm/simulator.hpp"

namespace mesbm {

// A dataset as read back from disk. Node identifiers from the files are
// mapped to dense 1-based indices in first-appearance order.
struct Dataset {
    std::vector<SubjectNetwork> subjects;  // file order
    CommunityAssignment assignment;
    std::vector<std::string> node_names;  // dense index - 1 -> file identifier
    bool time_normalized = false;         // times were min-max rescaled into [0, 1]
    double time_min = 0.0;                // original bounds when rescaled
    double time_max = 1.0;
};

// Writes contents to path via a temporary file and rename, so the target
// never holds a partial file.
void write_file_atomic(const std::string& path, const std::string& contents);

// Writes subjects.csv, edges.csv, communities.csv and truth.json into dir
// (created if missing).
void write_dataset(const GeneratedDataset& data, const std::string& dir);

// Reads the three CSV files back. Parse errors name the file and line.
// Times outside [0, 1] trigger a min-max rescale, recorded in the result.
Dataset load_dataset(const std::string& dir);

void write_truth(const Scenario& scenario, const std::string& path);
Scenario load_truth(const std::string& path);

void write_fit(const FitResult& fit, const std::string& path);

// Loads a fit artifact and re-verifies each block: the fused vector must lie
// in its recorded shape set and have at most b_star constant runs.
FitResult load_fit(const std::string& path);

}  // namespace mesbm
