#include "cpfit/io.hpp"

#include "cpfit/errors.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <charconv>
#include <sstream>

using namespace cpfit;
using cpfit::testing::random_dense;
using cpfit::testing::random_kruskal;
using cpfit::testing::random_sparse;

TEST(FormatDouble, round_trips_exactly) {
    Rng rng(401);
    for (int i = 0; i < 2000; ++i) {
        double x = (rng.uniform() - 0.5) * std::pow(10.0, 40.0 * (rng.uniform() - 0.5));
        if (i % 7 == 0) x = -x;
        const std::string s = format_double(x);
        double back = 0.0;
        std::from_chars(s.data(), s.data() + s.size(), back);
        EXPECT_EQ(back, x) << s;
    }
    EXPECT_EQ(format_double(0.0), "0");
}

TEST(TnsFormat, sparse_round_trip_one_based_on_disk) {
    Rng rng(409);
    const SparseTensor t = random_sparse(Shape({3, 4, 2}), rng, 0.4);
    std::ostringstream os;
    write_tns(t, os);
    const std::string text = os.str();
    EXPECT_EQ(text.substr(0, 10), "tns 3 3 4 ");

    std::istringstream is(text);
    const SparseTensor back = read_tns(is);
    ASSERT_EQ(back.nnz(), t.nnz());
    for (index_t i = 0; i < t.nnz(); ++i) {
        EXPECT_EQ(back.value(i), t.value(i));
        for (int n = 0; n < 3; ++n)
            EXPECT_EQ(back.coords(i)[static_cast<std::size_t>(n)],
                      t.coords(i)[static_cast<std::size_t>(n)]);
    }
}

TEST(TnsFormat, dense_round_trip) {
    Rng rng(419);
    const DenseTensor t = random_dense(Shape({2, 3, 2}), rng);
    std::ostringstream os;
    write_tns(t, os);
    std::istringstream is(os.str());
    const DenseTensor back = read_tns_dense(is);
    for (index_t i = 0; i < t.shape().num_elements(); ++i) EXPECT_EQ(back[i], t[i]);
}

TEST(TnsFormat, diagnostics_name_the_offending_line) {
    {
        std::istringstream is("tns 2 2 2 1\n3 1 5.0\n");
        try {
            read_tns(is, "bad.tns");
            FAIL() << "expected io_error";
        } catch (const io_error& e) {
            EXPECT_NE(std::string(e.what()).find("bad.tns:2"), std::string::npos);
        }
    }
    {
        std::istringstream is("tns 2 2 2 2\n1 1 5.0\n");
        EXPECT_THROW(read_tns(is), io_error); // truncated body
    }
    {
        std::istringstream is("tensor 2 2 2 1\n1 1 5.0\n");
        EXPECT_THROW(read_tns(is), io_error); // wrong magic
    }
    {
        std::istringstream is("tns 2 2 2 1\n1 1 abc\n");
        EXPECT_THROW(read_tns(is), io_error); // bad value
    }
}

TEST(KtensorFormat, round_trip) {
    Rng rng(421);
    const KruskalTensor k = random_kruskal(Shape({3, 2, 4}), 2, rng);
    std::ostringstream os;
    write_ktensor(k, os);
    EXPECT_EQ(os.str().substr(0, 16), "ktensor 3 2 3 2 ");
    std::istringstream is(os.str());
    const KruskalTensor back = read_ktensor(is);
    for (int n = 0; n < 3; ++n) EXPECT_EQ(back.factor(n), k.factor(n));
}

TEST(TraceCsv, golden_bytes) {
    Trace trace;
    trace.records.push_back({0, 0.0, 2.5, 1.0, 0.25, 1, 1, 0, false, 0.0});
    trace.records.push_back({1, 0.0, 1.25, 0.5, 0.125, 3, 3, 1, false, 1.5});
    trace.records.push_back({2, 0.0, 0.3125, 0.25, 0.0625, 5, 5, 2, true, 0.0});
    std::ostringstream os;
    write_trace_csv(trace, os);
    const std::string expect =
        "iter,time_s,f,h,gnorm_rel,fevals,gevals,restart,beta\n"
        "0,0,2.5,1,0.25,1,1,0,0\n"
        "1,0,1.25,0.5,0.125,3,3,0,1.5\n"
        "2,0,0.3125,0.25,0.0625,5,5,1,0\n";
    EXPECT_EQ(os.str(), expect);

    // header + one row per accepted iterate
    std::istringstream is(os.str());
    const Trace back = read_trace_csv(is);
    ASSERT_EQ(back.records.size(), 3u);
    EXPECT_EQ(back.records[2].restart, true);
    EXPECT_EQ(back.records[1].beta, 1.5);
}

TEST(PlotData, long_format_series) {
    Trace trace;
    trace.records.push_back({0, 0.0, 2.0, 1.0, 0.5, 1, 1, 0, false, 0.0});
    trace.records.push_back({1, 0.1, 1.0, 0.6, 0.25, 2, 2, 1, false, 1.0});
    std::ostringstream os;
    write_plot_data({{"run", trace, 0.5}}, os);
    const std::string expect =
        "series,iter,time_s,value\n"
        "run:absdiff_h,0,0,0.5\n"
        "run:absdiff_h,1,0.1,0.09999999999999998\n"
        "run:gnorm_rel,0,0,0.5\n"
        "run:gnorm_rel,1,0.1,0.25\n";
    EXPECT_EQ(os.str(), expect);
}

TEST(PlotSvg, produces_two_panels) {
    Trace trace;
    trace.records.push_back({0, 0.0, 2.0, 1.0, 0.5, 1, 1, 0, false, 0.0});
    trace.records.push_back({1, 0.1, 1.0, 0.6, 0.25, 2, 2, 1, false, 1.0});
    std::ostringstream os;
    write_plot_svg({{"run", trace, 0.0}}, os);
    const std::string svg = os.str();
    EXPECT_NE(svg.find("<svg"), std::string::npos);
    EXPECT_NE(svg.find("iteration"), std::string::npos);
    EXPECT_NE(svg.find("time (s)"), std::string::npos);
    EXPECT_GE(static_cast<int>(std::count(svg.begin(), svg.end(), '\n')), 10);
}
