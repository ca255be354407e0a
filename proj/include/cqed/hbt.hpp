#pragma once

#include "cqed/click_stream.hpp"

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace cqed {

/// Pair counts of delays t_b - t_a in bins centred on k * bin_width,
/// k = -half_bins..half_bins.
struct CorrelationHistogram {
    double bin_width_ps = 128.0;
    int half_bins = 0;
    std::vector<double> counts;
    std::size_t singles_a = 0;
    std::size_t singles_b = 0;
    double duration_ps = 0.0;
    bool autocorrelation = false;

    double tau(std::size_t i) const { return (static_cast<double>(i) - half_bins) * bin_width_ps; }
    double rate_a() const { return static_cast<double>(singles_a) / duration_ps; }
    double rate_b() const { return static_cast<double>(singles_b) / duration_ps; }
    double reach_ps() const { return (half_bins + 0.5) * bin_width_ps; }
    double total() const;
};

/// All-pairs correlation of two sorted time lists. With `autocorrelation`
/// the lists must be the same and self-pairs are skipped. Throws
/// StatisticsError if either list is empty.
CorrelationHistogram correlate(const std::vector<double>& a, const std::vector<double>& b, double duration_ps,
                               double window_ps, double bin_width_ps, bool autocorrelation);

/// Channel-filtered convenience form; an identical filter pair is treated as
/// an autocorrelation.
CorrelationHistogram correlate(const ClickStream& s, std::string_view channels_a, std::string_view channels_b,
                               double window_ps, double bin_width_ps);

/// Bin-wise sum of histograms accumulated over disjoint stream segments.
CorrelationHistogram merge(const CorrelationHistogram& x, const CorrelationHistogram& y);

enum class G2Method { pulsed_peak_area, cw_normalized };

const char* to_string(G2Method m);

struct G2Estimate {
    double value = 0.0;
    double error = 0.0;
    G2Method method = G2Method::pulsed_peak_area;
};

/// Area of the peak at k * rep_period integrated over +-rep_period / 2,
/// splitting boundary bins by overlap.
double peak_area(const CorrelationHistogram& h, double rep_period_ps, int k);

/// Centre peak area over the mean of n_side side peaks on each side.
/// Throws StatisticsError when the side peaks are empty and
/// std::invalid_argument when the histogram does not reach them.
G2Estimate pulsed_g2_zero(const CorrelationHistogram& h, double rep_period_ps, int n_side = 10);

/// Same estimator on an X-vs-C cross histogram.
G2Estimate cross_g2_zero(const CorrelationHistogram& h, double rep_period_ps, int n_side = 10);

/// g2 at the central bin normalised by rate_a * rate_b * (T - |tau|) * bin.
G2Estimate cw_g2_zero(const CorrelationHistogram& h);

/// Normalised CW curve for every bin.
std::vector<double> normalized_curve(const CorrelationHistogram& h);

/// Removes accidental pairs involving at least one dark count. Singles rates
/// are taken from the histogram and include the darks. Throws ConfigError when
/// the expected accidentals exceed a bin by more than 5 sigma.
CorrelationHistogram subtract_dark_counts(const CorrelationHistogram& h, double dark_rate_a, double dark_rate_b);

/// Delays of clicks after the preceding pulse, binned over [0, rep_period).
struct DecayHistogram {
    double bin_width_ps = 16.0;
    std::vector<double> counts;

    double left(std::size_t i) const { return static_cast<double>(i) * bin_width_ps; }
    double total() const;
};

/// With `first_only` just the first click after each pulse counts.
DecayHistogram decay_histogram(const std::vector<double>& times, double rep_period_ps, double bin_width_ps,
                               bool first_only = true);

struct LifetimeFit {
    double tau_ps = 0.0;
    double error_ps = 0.0;
    double reduced_chi2 = 0.0;
    double counts_used = 0.0;
    bool non_exponential = false;  // reduced chi2 above 3
};

/// Binned maximum-likelihood fit of a truncated exponential to the bins
/// starting at or after 3 * jitter_sigma. Throws StatisticsError below 100
/// counts in the fit range.
LifetimeFit fit_lifetime(const DecayHistogram& h, double jitter_sigma_ps = 0.0);

/// <n(n-1)>/<n>^2 (or <n_a n_b>/<n_a><n_b>) over the windows
/// [k rep, (k+1) rep). Direct oracle for the pulsed estimators.
double per_pulse_g2(const std::vector<double>& a, const std::vector<double>& b, double rep_period_ps,
                    double duration_ps, bool autocorrelation);

void write_histogram_csv(std::ostream& out, const CorrelationHistogram& h);

}  // namespace cqed
