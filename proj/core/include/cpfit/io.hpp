#pragma once

#include "cpfit/kruskal.hpp"
#include "cpfit/tensor.hpp"
#include "cpfit/trace.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace cpfit {

/// Shortest decimal form that round-trips the double exactly ('.' radix,
/// locale-independent).
std::string format_double(double x);

/// Tensor text format, 1-based coordinates:
///   tns <N> <I1> ... <IN> <nnz>
///   <i1> ... <iN> <value>     (one line per entry)
/// A dense tensor lists all K entries in linearization order. Parse errors
/// throw cpfit::io_error naming the offending line.
void write_tns(const SparseTensor& t, std::ostream& os);
void write_tns(const DenseTensor& t, std::ostream& os);
void write_tns_file(const SparseTensor& t, const std::string& path);
void write_tns_file(const DenseTensor& t, const std::string& path);
SparseTensor read_tns(std::istream& is, const std::string& name = "<stream>");
SparseTensor read_tns_file(const std::string& path);
/// Reads the same format into full storage; unlisted entries are zero.
DenseTensor read_tns_dense(std::istream& is, const std::string& name = "<stream>");
DenseTensor read_tns_dense_file(const std::string& path);

/// Kruskal tensor text format:
///   ktensor <N> <R> <I1> ... <IN>
/// followed by the factors in mode order, column-major, one value per line.
void write_ktensor(const KruskalTensor& k, std::ostream& os);
void write_ktensor_file(const KruskalTensor& k, const std::string& path);
KruskalTensor read_ktensor(std::istream& is, const std::string& name = "<stream>");
KruskalTensor read_ktensor_file(const std::string& path);

/// Trace CSV: header iter,time_s,f,h,gnorm_rel,fevals,gevals,restart,beta
/// and one row per accepted iterate.
void write_trace_csv(const Trace& trace, std::ostream& os);
void write_trace_csv(const Trace& trace, const std::string& path);
Trace read_trace_csv(std::istream& is, const std::string& name = "<stream>");
Trace read_trace_csv_file(const std::string& path);

/// Long-format plot series for one or more traces: columns
/// series,iter,time_s,value with an "<label>:absdiff_h" series carrying
/// |h - h*| and an "<label>:gnorm_rel" series per trace.
struct PlotSeriesInput {
    std::string label;
    Trace trace;
    double h_star = 0.0;
};
void write_plot_data(const std::vector<PlotSeriesInput>& inputs, std::ostream& os);

/// Two-panel SVG (value vs iteration, value vs time) of the same series on a
/// log10 vertical axis; a desk-scale convenience renderer.
void write_plot_svg(const std::vector<PlotSeriesInput>& inputs, std::ostream& os);

} // namespace cpfit
