#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dwg/rootfinding.hpp"

namespace dwg {

/// Process exit codes of the dwgs tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_verify_failed = 1,
    exit_validation = 2,
    exit_solver = 3,
    exit_incommensurate = 4,
    exit_polynomial_mismatch = 5,
};

struct RunConfig {
    std::string subcommand;
    std::string graph_path;
    std::optional<double> re_min, re_max, im_min, im_max;
    double tol = 1e-8;
    std::string method = "both";  // flower | scattering | both
    int workers = 1;
    std::string out;               // empty: standard output
    std::string format = "csv";    // csv | json
    double lo = 0.0, hi = 0.0;     // mu interval
    std::vector<double> radii;     // mu cutoffs; empty: 2 pi {20, 40, 60}
    int strips = 3;                // verify window height in units of 2 pi
    std::size_t max_degree = 64;   // abscissas: larger 2N is treated as incommensurate
    std::optional<long> seed;      // DWGS_SEED; no default path is stochastic

    /// Throws ValidationError for nonpositive tolerances or an empty window.
    void check() const;
};

int cmd_spectrum(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_abscissas(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_mu(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses arguments, dispatches, and maps library errors to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dwg
