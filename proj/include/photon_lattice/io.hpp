#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace photon_lattice::io {

// Frozen schemas. New columns may only be appended.
inline constexpr std::string_view kTrajectoryHeader = "t,re_alpha_N,im_alpha_N,abs_alpha_N";
inline constexpr std::string_view kSweepHeader = "N,mean_abs_alpha_N,sigma,n_realizations,n_failed";
inline constexpr std::string_view kPhaseHeader = "U,W,classification,power_exponent,power_r2,exp_rate,exp_r2,n_points";

inline constexpr std::string_view kFieldHeader = "t,site,re_alpha,im_alpha";
inline constexpr std::string_view kHistogramHeader = "ix,ip,x_center,p_center,count";
inline constexpr std::string_view kSummaryHeader = "t_start,t_end,mean_abs_alpha_N,sigma,n_samples";
inline constexpr std::string_view kRealizationHeader = "N,realization,seed,time_mean,time_variance,n_samples";
inline constexpr std::string_view kFitHeader = "model,exponent_or_rate,prefactor,r_squared,n_points,n_min,classification";
inline constexpr std::string_view kThresholdHeader = "axis,value,n_t,n_t_end,sigma_star";
inline constexpr std::string_view kThresholdScanHeader = "axis,value,N,sigma";
inline constexpr std::string_view kThresholdFitHeader = "axis,exponent,prefactor,r_squared,n_points";
inline constexpr std::string_view kStabilityHeader = "N,converged,residual_norm,newton_iterations,max_im";
inline constexpr std::string_view kSpectrumHeader = "N,index,re_E,im_E";
inline constexpr std::string_view kDisorderHeader =
    "N,mean_abs_alpha_N,sigma,n_realizations,n_failed,n_configs,n_failed_configs,median,log_mean,log_mean_std_error";
inline constexpr std::string_view kDisorderConfigHeader = "N,config,mean_abs_alpha_N";

/// Shortest round-trip-safe rendering: 17 significant digits, '.' separator.
std::string format_number(double v);
std::string format_optional(const std::optional<double>& v);

class CsvWriter {
public:
    /// Opens `path` for writing and emits the header line. Throws
    /// std::runtime_error on I/O failure.
    CsvWriter(const std::filesystem::path& path, std::string_view header);

    CsvWriter& cell(std::string_view text);
    CsvWriter& cell(double v);
    CsvWriter& cell(long long v);
    CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::size_t v) { return cell(static_cast<long long>(v)); }
    CsvWriter& cell(std::uint64_t v, bool /*unsigned_tag*/);
    CsvWriter& cell(const std::optional<double>& v) { return cell(std::string_view(format_optional(v))); }
    void end_row();

    /// Flushes and checks the stream; throws on failure.
    void close();

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    std::ofstream out_;
    bool row_started_ = false;
};

}  // namespace photon_lattice::io
