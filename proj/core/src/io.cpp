#include "cpfit/io.hpp"

#include "cpfit/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>
#include <vector>

namespace cpfit {

std::string format_double(double x) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, end);
}

const char* to_string(StopReason reason) {
    switch (reason) {
    case StopReason::GradTol: return "grad_tol";
    case StopReason::MaxIters: return "max_iters";
    case StopReason::Stalled: return "stalled";
    }
    return "unknown";
}

namespace {

class LineReader {
public:
    LineReader(std::istream& is, std::string name) : is_(is), name_(std::move(name)) {}

    bool next(std::string& line) {
        if (!std::getline(is_, line)) return false;
        ++lineno_;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    }

    [[noreturn]] void fail(const std::string& what) const {
        throw io_error(name_ + ":" + std::to_string(lineno_) + ": " + what);
    }

    std::string required(const std::string& what) {
        std::string line;
        if (!next(line)) throw io_error(name_ + ": unexpected end of file, expected " + what);
        return line;
    }

private:
    std::istream& is_;
    std::string name_;
    long lineno_ = 0;
};

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

long long parse_int(const std::string& tok, const LineReader& reader) {
    long long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        reader.fail("expected an integer, got '" + tok + "'");
    return v;
}

double parse_double(const std::string& tok, const LineReader& reader) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || p != tok.data() + tok.size())
        reader.fail("expected a number, got '" + tok + "'");
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("cannot open '" + path + "' for writing");
    return os;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("cannot open '" + path + "' for reading");
    return is;
}

void write_tns_header(std::ostream& os, const Shape& shape, index_t nnz) {
    os << "tns " << shape.order();
    for (int n = 0; n < shape.order(); ++n) os << ' ' << shape.dim(n);
    os << ' ' << nnz << '\n';
}

struct TnsHeader {
    Shape shape;
    index_t nnz;
};

TnsHeader read_tns_header(LineReader& reader) {
    const auto toks = split_ws(reader.required("tns header"));
    if (toks.empty() || toks[0] != "tns") reader.fail("expected 'tns' header");
    if (toks.size() < 2) reader.fail("tns header needs an order");
    const auto order = parse_int(toks[1], reader);
    if (order < 1) reader.fail("tensor order must be >= 1");
    if (static_cast<long long>(toks.size()) != order + 3)
        reader.fail("tns header needs <N> mode sizes and a count");
    std::vector<index_t> dims;
    for (long long n = 0; n < order; ++n) {
        const auto d = parse_int(toks[static_cast<std::size_t>(2 + n)], reader);
        if (d < 1) reader.fail("mode sizes must be >= 1");
        dims.push_back(static_cast<index_t>(d));
    }
    const auto nnz = parse_int(toks.back(), reader);
    if (nnz < 0) reader.fail("entry count must be >= 0");
    return {Shape(std::move(dims)), static_cast<index_t>(nnz)};
}

struct TnsBody {
    std::vector<index_t> coords;
    std::vector<double> values;
};

TnsBody read_tns_body(LineReader& reader, const TnsHeader& header) {
    const int order = header.shape.order();
    TnsBody body;
    body.coords.reserve(static_cast<std::size_t>(header.nnz * order));
    body.values.reserve(static_cast<std::size_t>(header.nnz));
    for (index_t i = 0; i < header.nnz; ++i) {
        const auto toks = split_ws(reader.required("tensor entry"));
        if (static_cast<int>(toks.size()) != order + 1)
            reader.fail("entry needs " + std::to_string(order) + " indices and a value");
        for (int n = 0; n < order; ++n) {
            const auto c = parse_int(toks[static_cast<std::size_t>(n)], reader);
            if (c < 1 || c > header.shape.dim(n)) reader.fail("index out of bounds");
            body.coords.push_back(static_cast<index_t>(c - 1));
        }
        body.values.push_back(parse_double(toks.back(), reader));
    }
    return body;
}

} // namespace

void write_tns(const SparseTensor& t, std::ostream& os) {
    write_tns_header(os, t.shape(), t.nnz());
    const int order = t.shape().order();
    for (index_t i = 0; i < t.nnz(); ++i) {
        const auto c = t.coords(i);
        for (int n = 0; n < order; ++n) os << c[static_cast<std::size_t>(n)] + 1 << ' ';
        os << format_double(t.value(i)) << '\n';
    }
}

void write_tns(const DenseTensor& t, std::ostream& os) {
    const Shape& shape = t.shape();
    write_tns_header(os, shape, shape.num_elements());
    const int order = shape.order();
    std::vector<index_t> idx(static_cast<std::size_t>(order), 0);
    for (index_t flat = 0; flat < shape.num_elements(); ++flat) {
        for (int n = 0; n < order; ++n) os << idx[static_cast<std::size_t>(n)] + 1 << ' ';
        os << format_double(t[flat]) << '\n';
        for (int n = 0; n < order; ++n) {
            if (++idx[static_cast<std::size_t>(n)] < shape.dim(n)) break;
            idx[static_cast<std::size_t>(n)] = 0;
        }
    }
}

void write_tns_file(const SparseTensor& t, const std::string& path) {
    auto os = open_out(path);
    write_tns(t, os);
}

void write_tns_file(const DenseTensor& t, const std::string& path) {
    auto os = open_out(path);
    write_tns(t, os);
}

SparseTensor read_tns(std::istream& is, const std::string& name) {
    LineReader reader(is, name);
    const auto header = read_tns_header(reader);
    auto body = read_tns_body(reader, header);
    return SparseTensor(header.shape, std::move(body.coords), std::move(body.values));
}

SparseTensor read_tns_file(const std::string& path) {
    auto is = open_in(path);
    return read_tns(is, path);
}

DenseTensor read_tns_dense(std::istream& is, const std::string& name) {
    LineReader reader(is, name);
    const auto header = read_tns_header(reader);
    const auto body = read_tns_body(reader, header);
    std::vector<double> values(static_cast<std::size_t>(header.shape.num_elements()), 0.0);
    const int order = header.shape.order();
    for (std::size_t i = 0; i < body.values.size(); ++i) {
        std::span<const index_t> c(body.coords.data() + i * static_cast<std::size_t>(order),
                                   static_cast<std::size_t>(order));
        values[static_cast<std::size_t>(header.shape.offset(c))] = body.values[i];
    }
    return DenseTensor(header.shape, std::move(values));
}

DenseTensor read_tns_dense_file(const std::string& path) {
    auto is = open_in(path);
    return read_tns_dense(is, path);
}

void write_ktensor(const KruskalTensor& k, std::ostream& os) {
    os << "ktensor " << k.order() << ' ' << k.rank();
    for (int n = 0; n < k.order(); ++n) os << ' ' << k.factor(n).rows();
    os << '\n';
    for (int n = 0; n < k.order(); ++n) {
        const Matrix& a = k.factor(n);
        for (index_t i = 0; i < a.size(); ++i) os << format_double(a.data()[i]) << '\n';
    }
}

void write_ktensor_file(const KruskalTensor& k, const std::string& path) {
    auto os = open_out(path);
    write_ktensor(k, os);
}

KruskalTensor read_ktensor(std::istream& is, const std::string& name) {
    LineReader reader(is, name);
    const auto toks = split_ws(reader.required("ktensor header"));
    if (toks.empty() || toks[0] != "ktensor") reader.fail("expected 'ktensor' header");
    if (toks.size() < 3) reader.fail("ktensor header needs an order and a rank");
    const auto order = parse_int(toks[1], reader);
    const auto rank = parse_int(toks[2], reader);
    if (order < 1 || rank < 1) reader.fail("order and rank must be >= 1");
    if (static_cast<long long>(toks.size()) != order + 3)
        reader.fail("ktensor header needs <N> mode sizes");

    std::vector<Matrix> factors;
    for (long long n = 0; n < order; ++n) {
        const auto rows = parse_int(toks[static_cast<std::size_t>(3 + n)], reader);
        if (rows < 1) reader.fail("mode sizes must be >= 1");
        factors.emplace_back(rows, rank);
    }
    for (auto& a : factors)
        for (index_t i = 0; i < a.size(); ++i)
            a.data()[i] = parse_double(split_ws(reader.required("factor value")).at(0), reader);
    return KruskalTensor(std::move(factors));
}

KruskalTensor read_ktensor_file(const std::string& path) {
    auto is = open_in(path);
    return read_ktensor(is, path);
}

void write_trace_csv(const Trace& trace, std::ostream& os) {
    os << "iter,time_s,f,h,gnorm_rel,fevals,gevals,restart,beta\n";
    for (const TraceRecord& r : trace.records) {
        os << r.iter << ',' << format_double(r.time_s) << ',' << format_double(r.f) << ','
           << format_double(r.h) << ',' << format_double(r.gnorm_rel) << ',' << r.fevals << ','
           << r.gevals << ',' << (r.restart ? 1 : 0) << ',' << format_double(r.beta) << '\n';
    }
}

void write_trace_csv(const Trace& trace, const std::string& path) {
    auto os = open_out(path);
    write_trace_csv(trace, os);
}

Trace read_trace_csv(std::istream& is, const std::string& name) {
    LineReader reader(is, name);
    std::string line = reader.required("trace header");
    Trace trace;
    while (reader.next(line)) {
        if (line.empty()) continue;
        std::vector<std::string> toks;
        std::string tok;
        std::istringstream ss(line);
        while (std::getline(ss, tok, ',')) toks.push_back(tok);
        if (toks.size() != 9) reader.fail("trace row needs 9 columns");
        TraceRecord r;
        r.iter = static_cast<int>(parse_int(toks[0], reader));
        r.time_s = parse_double(toks[1], reader);
        r.f = parse_double(toks[2], reader);
        r.h = parse_double(toks[3], reader);
        r.gnorm_rel = parse_double(toks[4], reader);
        r.fevals = parse_int(toks[5], reader);
        r.gevals = parse_int(toks[6], reader);
        r.restart = parse_int(toks[7], reader) != 0;
        r.beta = parse_double(toks[8], reader);
        trace.records.push_back(r);
    }
    return trace;
}

Trace read_trace_csv_file(const std::string& path) {
    auto is = open_in(path);
    return read_trace_csv(is, path);
}

void write_plot_data(const std::vector<PlotSeriesInput>& inputs, std::ostream& os) {
    os << "series,iter,time_s,value\n";
    for (const auto& in : inputs) {
        for (const TraceRecord& r : in.trace.records)
            os << in.label << ":absdiff_h," << r.iter << ',' << format_double(r.time_s) << ','
               << format_double(std::abs(r.h - in.h_star)) << '\n';
        for (const TraceRecord& r : in.trace.records)
            os << in.label << ":gnorm_rel," << r.iter << ',' << format_double(r.time_s) << ','
               << format_double(r.gnorm_rel) << '\n';
    }
}

namespace {

struct SvgSeries {
    std::string label;
    std::vector<double> x_iter;
    std::vector<double> x_time;
    std::vector<double> y;
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

void draw_panel(std::ostream& os, const std::vector<SvgSeries>& series, bool use_time, double x0,
                const char* x_label) {
    constexpr double kW = 420, kH = 320, kL = 56, kB = 40, kT = 24, kR = 12;
    double xmax = 1e-300, ymin = 1e300, ymax = 1e-300;
    for (const auto& s : series) {
        const auto& xs = use_time ? s.x_time : s.x_iter;
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            xmax = std::max(xmax, xs[i]);
            if (s.y[i] > 0.0) {
                ymin = std::min(ymin, s.y[i]);
                ymax = std::max(ymax, s.y[i]);
            }
        }
    }
    if (ymin > ymax) {
        ymin = 1e-16;
        ymax = 1.0;
    }
    const double ly0 = std::floor(std::log10(ymin));
    const double ly1 = std::ceil(std::log10(ymax * 1.0000001));
    xmax = std::max(xmax, 1e-300);

    auto px = [&](double x) { return x0 + kL + (kW - kL - kR) * (xmax > 0 ? x / xmax : 0.0); };
    auto py = [&](double y) {
        const double ly = std::log10(std::max(y, 1e-300));
        return kT + (kH - kT - kB) * (ly1 - ly) / std::max(ly1 - ly0, 1e-12);
    };

    os << "<rect x='" << x0 + kL << "' y='" << kT << "' width='" << kW - kL - kR << "' height='"
       << kH - kT - kB << "' fill='none' stroke='#888'/>\n";
    for (double e = ly0; e <= ly1; e += std::max(1.0, std::floor((ly1 - ly0) / 8.0))) {
        const double y = py(std::pow(10.0, e));
        os << "<line x1='" << x0 + kL << "' y1='" << y << "' x2='" << x0 + kW - kR << "' y2='" << y
           << "' stroke='#ddd'/>\n";
        os << "<text x='" << x0 + kL - 4 << "' y='" << y + 4
           << "' font-size='10' text-anchor='end'>1e" << static_cast<int>(e) << "</text>\n";
    }
    for (int i = 0; i <= 4; ++i) {
        const double x = xmax * i / 4.0;
        os << "<text x='" << px(x) << "' y='" << kH - kB + 14
           << "' font-size='10' text-anchor='middle'>" << format_double(x) << "</text>\n";
    }
    os << "<text x='" << x0 + (kL + kW - kR) / 2 << "' y='" << kH - 8
       << "' font-size='11' text-anchor='middle'>" << x_label << "</text>\n";

    int color = 0;
    for (const auto& s : series) {
        const auto& xs = use_time ? s.x_time : s.x_iter;
        os << "<polyline fill='none' stroke='" << kPalette[color % 8] << "' points='";
        for (std::size_t i = 0; i < s.y.size(); ++i)
            os << px(xs[i]) << ',' << py(std::max(s.y[i], 1e-300)) << ' ';
        os << "'/>\n";
        os << "<text x='" << x0 + kL + 6 << "' y='" << kT + 12 + 12 * color << "' font-size='10' fill='"
           << kPalette[color % 8] << "'>" << s.label << "</text>\n";
        ++color;
    }
}

} // namespace

void write_plot_svg(const std::vector<PlotSeriesInput>& inputs, std::ostream& os) {
    std::vector<SvgSeries> series;
    for (const auto& in : inputs) {
        SvgSeries a{in.label + ":absdiff_h", {}, {}, {}};
        SvgSeries b{in.label + ":gnorm_rel", {}, {}, {}};
        for (const TraceRecord& r : in.trace.records) {
            a.x_iter.push_back(r.iter);
            a.x_time.push_back(r.time_s);
            a.y.push_back(std::abs(r.h - in.h_star));
            b.x_iter.push_back(r.iter);
            b.x_time.push_back(r.time_s);
            b.y.push_back(r.gnorm_rel);
        }
        series.push_back(std::move(a));
        series.push_back(std::move(b));
    }
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='840' height='320' "
          "font-family='sans-serif'>\n";
    draw_panel(os, series, false, 0.0, "iteration");
    draw_panel(os, series, true, 420.0, "time (s)");
    os << "</svg>\n";
}

} // namespace cpfit
