#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace netlasso {

struct RunConfig {
    std::string command;  // simulate | fit | meta | eval
    std::string out;
    int threads = 0;
    std::uint64_t seed = 1;

    // simulate
    std::string design;

    // fit / meta inputs
    std::string geno;
    std::string pheno;
    std::string covar;
    std::string gmt;
    std::string snpmap;
    int max_genes = 0;
    std::string pairs;
    std::string weights;
    std::string diag_mode = "ones";
    bool binary_weights = false;

    // tuning and solver
    int s = 0;
    int slack = 1;
    std::optional<double> c;
    std::optional<double> r;
    double tol = 1e-6;
    int max_cycles = 1000;

    // meta
    std::string procedure;
    std::string cohort_list;
    int K = 1;

    // eval
    std::string results;
    std::string truth;
    int max_threshold = 10;

    // Checks everything that can be checked before reading data.
    void validate() const;
};

// Runs one validated command; throws netlasso::Error on failure.
void dispatch(const RunConfig& cfg);

// Full command-line entry point. Returns the process exit status; failures
// print a JSON error record {"code", "message", "field"} on stderr.
int run_cli(int argc, char** argv);

}  // namespace netlasso
