#include <gtest/gtest.h>

#include "densecap/error.hpp"
#include "densecap/layers.hpp"
#include "densecap/partition.hpp"
#include "densecap/step.hpp"

namespace densecap {
namespace {

TEST(Partition, EquipartitionMeasures) {
  const Partition p = Partition::equipartition(4);
  ASSERT_EQ(p.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(p.measure(i), (Measure{1, 4}));
  EXPECT_TRUE(p.is_equipartition());
  EXPECT_TRUE(p.is_sorted_interval());
}

TEST(Partition, WeightsAreReducedExactly) {
  const Partition p = Partition::from_weights({2, 4, 2});
  EXPECT_EQ(p.measure(1), (Measure{1, 2}));
  EXPECT_FALSE(p.is_equipartition());
  EXPECT_THROW(Partition::from_weights({1, 0, 1}), Error);
}

TEST(Partition, NonIntervalPartsKeepTheirAtoms) {
  // part 0 = [0,1/4) u [1/2,3/4), part 1 = the rest
  const Partition p = Partition::from_atoms(4, {0, 1, 2, 3, 4}, {0, 1, 0, 1});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_FALSE(p.is_interval());
  EXPECT_EQ(p.measure(0), (Measure{1, 2}));
  EXPECT_EQ(p.atoms_of(0).size(), 2u);
  EXPECT_EQ(p.leftmost(1), 1);
}

TEST(Partition, CommonRefinementOfThirdsAndHalves) {
  const Partition r = common_refinement(Partition::equipartition(3), Partition::equipartition(2));
  ASSERT_EQ(r.size(), 4u);
  EXPECT_EQ(r.measure(0), (Measure{1, 3}));
  EXPECT_EQ(r.measure(1), (Measure{1, 6}));
  EXPECT_TRUE(is_refinement(r, Partition::equipartition(3)));
  EXPECT_TRUE(is_refinement(r, Partition::equipartition(2)));
  EXPECT_FALSE(is_refinement(Partition::equipartition(2), r));
  const auto map = part_map(r, Partition::equipartition(2));
  EXPECT_EQ(map, (std::vector<int>{0, 0, 1, 1}));
  EXPECT_THROW(part_map(Partition::equipartition(2), Partition::equipartition(3)), Error);
}

TEST(Partition, RelabelMergesParts) {
  const Partition p = Partition::equipartition(4).relabel({0, 1, 0, 1});
  ASSERT_EQ(p.size(), 2u);
  EXPECT_EQ(p.measure(0), (Measure{1, 2}));
}

TEST(Partition, LcmOverflowIsACapacityError) {
  try {
    checked_lcm(std::int64_t{1} << 62, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::capacity);
  }
}

TEST(StepObjects, KernelOnFinerPartitionRepeatsBlocks) {
  Eigen::Matrix2d c;
  c << 0.5, -0.25, 1.0, 0.0;
  const StepKernel k(Partition::equipartition(2), c);
  const StepKernel f = k.on(Partition::equipartition(4));
  EXPECT_EQ(f.coeffs()(0, 3), -0.25);
  EXPECT_EQ(f.coeffs()(3, 0), 1.0);
  EXPECT_THROW(StepKernel(Partition::equipartition(1), Eigen::MatrixXd::Constant(1, 1, 1.5)),
               Error);
}

TEST(StepObjects, DifferenceLivesOnCommonRefinement) {
  const StepKernel a = StepKernel::constant(0.5);
  const StepKernel b(Partition::equipartition(3), Eigen::MatrixXd::Constant(3, 3, 0.25));
  const MeasuredMatrix d = MeasuredMatrix::difference(a, b);
  EXPECT_EQ(d.values.rows(), 3);
  EXPECT_NEAR(d.values.sum(), 9 * 0.25, 1e-15);
  EXPECT_NEAR(d.row_measure.sum(), 1.0, 1e-15);
}

TEST(Layers, PartitionsOfTheUnitInterval) {
  const LayerStructure s(3, 2, 3, 6);
  EXPECT_EQ(s.n(), 30);
  EXPECT_EQ(s.M(), 6);
  EXPECT_EQ(s.layer_partition().size(), 5u);
  EXPECT_EQ(s.input_cells().size(), 10u);
  EXPECT_EQ(s.output_cells().size(), 15u);
  EXPECT_EQ(s.input_cell(4), 1);
  EXPECT_EQ(s.output_cell(s.layer_begin(3) + 5), 2);
  EXPECT_THROW(LayerStructure(3, 4, 1, 6), Error);
  EXPECT_THROW(LayerStructure(1, 1, 1, 1), Error);
}

}  // namespace
}  // namespace densecap
