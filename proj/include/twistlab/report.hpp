#ifndef TWISTLAB_REPORT_HPP
#define TWISTLAB_REPORT_HPP

#include <map>
#include <string>
#include <vector>

namespace twistlab {

/// Aggregated result of one experiment: raw sample rows, fitted exponents,
/// empirical envelope constants and named pass/fail flags.
struct ExperimentReport {
    std::string tag;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> samples;
    std::map<std::string, double> exponents;     // name -> fitted slope
    std::map<std::string, double> exponent_cis;  // name -> CI half-width
    std::map<std::string, double> envelopes;     // name -> empirical constant
    std::map<std::string, bool> flags;           // criterion name -> pass
    std::string provenance;                      // config hash / grid / seeds

    void add_row(std::initializer_list<double> row) { samples.emplace_back(row); }
    bool all_pass() const {
        for (auto& [k, v] : flags)
            if (!v) return false;
        return true;
    }
};

} // namespace twistlab

#endif
