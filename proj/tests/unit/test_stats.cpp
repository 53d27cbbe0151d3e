#include <adequacy/error.hpp>
#include <adequacy/stats.hpp>

#include <gtest/gtest.h>

#include <vector>

using namespace adequacy;

TEST(Quantile, Type7MatchesHandValues) {
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    EXPECT_DOUBLE_EQ(quantile_type7(x, 0.5), 5.5);
    EXPECT_DOUBLE_EQ(quantile_type7(x, 0.9), 9.1);
    EXPECT_DOUBLE_EQ(quantile_type7(x, 0.95), 9.55);
    EXPECT_DOUBLE_EQ(quantile_type7(x, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile_type7(x, 1.0), 10.0);
}

TEST(Quantile, OrderOfInputIrrelevant) {
    const std::vector<double> x{3, 1, 2};
    EXPECT_DOUBLE_EQ(quantile_type7(x, 0.5), 2.0);
    EXPECT_DOUBLE_EQ(quantile_type7(x, 0.25), 1.5);
}

TEST(Quantile, SingleValueAndEmpty) {
    const std::vector<double> one{4.2};
    EXPECT_DOUBLE_EQ(quantile_type7(one, 0.3), 4.2);
    EXPECT_THROW((void)quantile_type7(std::vector<double>{}, 0.5), DataError);
}

TEST(Moments, MeanAndUnbiasedVariance) {
    const std::vector<double> x{2, 4, 4, 4, 5, 5, 7, 9};
    EXPECT_DOUBLE_EQ(mean(x), 5.0);
    EXPECT_DOUBLE_EQ(variance(x), 32.0 / 7.0);
    EXPECT_DOUBLE_EQ(variance(std::vector<double>{1.0}), 0.0);
}
