#include <doctest.h>

#include <cmath>

#include "gptree/gp.hpp"
#include "gptree/rng.hpp"

using namespace gptree;

namespace {

Dataset random_dataset(CounterRng& rng, int n, int d, double noise = 0.01) {
  Dataset ds;
  ds.X.resize(n, d);
  ds.y.resize(n);
  ds.y_var.resize(n);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) {
      ds.X(i, j) = rng.uniform();
      s += ds.X(i, j);
    }
    ds.y[i] = std::sin(3.0 * s) + 0.3 * s + noise * rng.normal();
    ds.y_var[i] = noise * noise;
  }
  return ds;
}

KernelParams make_params(double sig, std::initializer_list<double> ls) {
  KernelParams p;
  p.signal_variance = sig;
  p.lengthscales = Eigen::VectorXd(static_cast<Eigen::Index>(ls.size()));
  Eigen::Index j = 0;
  for (double l : ls) p.lengthscales[j++] = l;
  return p;
}

}  // namespace

TEST_CASE("dataset validation and editing") {
  Dataset ds;
  Eigen::VectorXd x(2);
  x << 0.1, 0.2;
  ds.append(x, 1.0, 0.0);
  x << 0.3, 0.4;
  ds.append(x, 2.0, 0.5);
  CHECK(ds.size() == 2);
  CHECK(ds.dim() == 2);
  ds.validate();

  ds.remove_rows({0});
  CHECK(ds.size() == 1);
  CHECK(ds.y[0] == 2.0);
  CHECK_THROWS_AS(ds.remove_rows({5}), std::out_of_range);

  Dataset bad = ds;
  bad.y_var[0] = -1.0;
  CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("log marginal likelihood of a single unit-noise observation") {
  Dataset ds;
  Eigen::VectorXd x(1);
  x << 0.3;
  ds.append(x, 0.0, 1.0);
  auto p = make_params(1e-12, {1.0});
  LmlResult r = log_marginal_likelihood(ds, KernelKind::Gaussian, p, 0.0);
  // -(1/2) log(2 pi (1 + 1e-12))
  CHECK(r.value == doctest::Approx(-0.9189385332051728).epsilon(1e-12));
  CHECK(r.gradient[2] == doctest::Approx(0.0).epsilon(1e-9));  // mean gradient
}

TEST_CASE("log marginal likelihood is invariant under a joint shift") {
  CounterRng rng(5);
  Dataset ds = random_dataset(rng, 10, 2);
  auto p = make_params(1.3, {0.4, 0.7});
  const double base = log_marginal_likelihood(ds, KernelKind::Matern32, p, 0.2).value;
  Dataset shifted = ds;
  shifted.y.array() += 7.5;
  const double moved =
      log_marginal_likelihood(shifted, KernelKind::Matern32, p, 0.2 + 7.5).value;
  CHECK(moved == doctest::Approx(base).epsilon(1e-10));
}

TEST_CASE("log marginal likelihood gradient matches finite differences") {
  CounterRng rng(17);
  const double h = 1e-5;
  for (int t = 0; t < 50; ++t) {
    Dataset ds = random_dataset(rng, 8, 2, 0.05);
    const KernelKind kind =
        t % 3 == 0 ? KernelKind::Gaussian
                   : (t % 3 == 1 ? KernelKind::Matern32 : KernelKind::Matern52);
    Eigen::VectorXd theta(4);  // log sig^2, log l1, log l2, mean
    theta << 0.6 * (rng.uniform() - 0.5), -0.5 + rng.uniform(),
        -0.5 + rng.uniform(), 0.4 * (rng.uniform() - 0.5);

    auto value_at = [&](const Eigen::VectorXd& tv) {
      KernelParams p;
      p.signal_variance = std::exp(tv[0]);
      p.lengthscales = Eigen::VectorXd(2);
      p.lengthscales << std::exp(tv[1]), std::exp(tv[2]);
      return log_marginal_likelihood(ds, kind, p, tv[3]).value;
    };

    KernelParams p;
    p.signal_variance = std::exp(theta[0]);
    p.lengthscales = Eigen::VectorXd(2);
    p.lengthscales << std::exp(theta[1]), std::exp(theta[2]);
    const LmlResult r = log_marginal_likelihood(ds, kind, p, theta[3]);
    REQUIRE(r.gradient.size() == 4);
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[j] += h;
      tm[j] -= h;
      const double fd = (value_at(tp) - value_at(tm)) / (2 * h);
      CHECK(std::abs(r.gradient[j] - fd) / std::max(std::abs(fd), 1e-6) < 1e-4);
    }
  }
}

TEST_CASE("fit recovers a plausible lengthscale for a sine wave") {
  CounterRng rng(23);
  Dataset ds;
  for (int i = 0; i < 30; ++i) {
    Eigen::VectorXd x(1);
    x << rng.uniform();
    ds.append(x, std::sin(2.0 * M_PI * x[0]), 1e-6);
  }
  TrainedGP gp = TrainedGP::fit(ds, KernelKind::Gaussian);
  const double l = gp.params().lengthscales[0];
  CHECK(l > 0.05);
  CHECK(l < 0.6);

  // Coarse grid over (log sigma^2, log l) with the fitted constant mean:
  // the optimizer must do at least as well as the best grid point.
  double best = -1e300;
  for (double ls = -3.0; ls <= 2.0; ls += 0.25) {
    for (double ll = -4.0; ll <= 0.5; ll += 0.25) {
      auto p = make_params(std::exp(ls), {std::exp(ll)});
      best = std::max(
          best, log_marginal_likelihood(ds, KernelKind::Gaussian, p, gp.mean_const())
                    .value);
    }
  }
  const double fitted =
      log_marginal_likelihood(ds, KernelKind::Gaussian, gp.params(), gp.mean_const())
          .value;
  CHECK(fitted >= best - 1e-3);
}

TEST_CASE("fit handles constant observations") {
  Dataset ds;
  for (int i = 0; i < 6; ++i) {
    Eigen::VectorXd x(1);
    x << 0.1 * i;
    ds.append(x, 2.5, 1e-4);
  }
  TrainedGP gp = TrainedGP::fit(ds, KernelKind::Matern32);
  Eigen::VectorXd probe(1);
  probe << 0.25;
  CHECK(gp.predict(probe).mean == doctest::Approx(2.5).epsilon(1e-3));
}

TEST_CASE("single-point fit freezes hyperparameters and reproduces the target") {
  Dataset ds;
  Eigen::VectorXd x(3);
  x << 0.1, 0.5, 0.9;
  ds.append(x, 4.2, 0.0);
  TrainedGP gp = TrainedGP::fit(ds, KernelKind::Matern52);
  CHECK(gp.mean_const() == 4.2);
  CHECK(gp.params().signal_variance == 1e-8);
  CHECK(gp.predict(x).mean == doctest::Approx(4.2).epsilon(1e-12));
}

TEST_CASE("refitting from the optimum converges immediately") {
  CounterRng rng(31);
  Dataset ds = random_dataset(rng, 20, 2);
  TrainedGP gp = TrainedGP::fit(ds, KernelKind::Matern32);
  TrainedGP again = TrainedGP::fit(ds, KernelKind::Matern32, gp.hyper());
  CHECK(again.fit_info().iterations <= 3);
}

TEST_CASE("prediction matches the explicit-inverse formula") {
  CounterRng rng(41);
  Dataset ds = random_dataset(rng, 10, 2);
  auto hyper = HyperParams{make_params(1.4, {0.5, 0.8}), 0.3};
  TrainedGP gp = TrainedGP::with_hyper(ds, KernelKind::Matern52, hyper);

  Eigen::MatrixXd K =
      kernel_matrix(KernelKind::Matern52, ds.X, hyper.kernel, ds.y_var);
  Eigen::MatrixXd Kinv = K.inverse();
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd xs(2);
    xs << rng.uniform(), rng.uniform();
    Eigen::VectorXd ks(ds.size());
    for (Eigen::Index i = 0; i < ds.size(); ++i)
      ks[i] = kernel_eval(KernelKind::Matern52, xs, ds.X.row(i).transpose(),
                          hyper.kernel);
    const double mean_ref =
        hyper.mean_const + ks.dot(Kinv * (ds.y.array() - hyper.mean_const).matrix());
    const double var_ref = hyper.kernel.signal_variance - ks.dot(Kinv * ks);
    const Prediction p = gp.predict(xs);
    CHECK(std::abs(p.mean - mean_ref) <= 1e-8 * std::max(1.0, std::abs(mean_ref)));
    CHECK(std::abs(p.variance - std::max(var_ref, 0.0)) <= 1e-8);
  }
}

TEST_CASE("prediction interpolates noise-free data and reverts to the prior") {
  CounterRng rng(43);
  Dataset ds = random_dataset(rng, 12, 2, 0.0);
  ds.y_var.setConstant(1e-10);
  auto hyper = HyperParams{make_params(1.0, {0.4, 0.4}), 0.0};
  TrainedGP gp = TrainedGP::with_hyper(ds, KernelKind::Gaussian, hyper);

  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const Prediction p = gp.predict(ds.X.row(i).transpose());
    CHECK(std::abs(p.mean - ds.y[i]) < 1e-3);
    CHECK(p.variance < 1e-3);
  }
  Eigen::VectorXd far(2);
  far << 100.0, -100.0;
  const Prediction p = gp.predict(far);
  CHECK(p.mean == doctest::Approx(hyper.mean_const).epsilon(1e-10));
  CHECK(p.variance == doctest::Approx(hyper.kernel.signal_variance).epsilon(1e-10));
}

TEST_CASE("posterior variance never exceeds the prior variance") {
  CounterRng rng(47);
  Dataset ds = random_dataset(rng, 15, 3);
  TrainedGP gp = TrainedGP::fit(ds, KernelKind::Matern32);
  for (int t = 0; t < 50; ++t) {
    Eigen::VectorXd xs(3);
    xs << rng.uniform(), rng.uniform(), rng.uniform();
    const Prediction p = gp.predict(xs);
    CHECK(p.variance >= 0.0);
    CHECK(p.variance <= gp.params().signal_variance * (1.0 + 1e-12));
  }
}

TEST_CASE("prediction is translation invariant at fixed hyperparameters") {
  CounterRng rng(53);
  Dataset ds = random_dataset(rng, 12, 2);
  auto hyper = HyperParams{make_params(1.2, {0.5, 0.6}), 0.1};
  TrainedGP gp = TrainedGP::with_hyper(ds, KernelKind::Matern32, hyper);

  Dataset moved = ds;
  moved.X.array() += 2.0;  // exactly representable shift
  TrainedGP gp2 = TrainedGP::with_hyper(moved, KernelKind::Matern32, hyper);
  for (int t = 0; t < 20; ++t) {
    Eigen::VectorXd xs(2);
    xs << rng.uniform(), rng.uniform();
    const Prediction a = gp.predict(xs);
    const Prediction b = gp2.predict((xs.array() + 2.0).matrix());
    CHECK(std::abs(a.mean - b.mean) < 1e-10);
    CHECK(std::abs(a.variance - b.variance) < 1e-10);
  }
}

TEST_CASE("retrain shortcuts and matches a warm-started refit") {
  CounterRng rng(59);
  Dataset ds = random_dataset(rng, 15, 2);
  TrainedGP gp = TrainedGP::fit(ds, KernelKind::Matern32);

  TrainedGP same = gp.retrain(Dataset{}, {});
  Eigen::VectorXd probe(2);
  probe << 0.4, 0.6;
  CHECK(same.predict(probe).mean == gp.predict(probe).mean);
  CHECK(same.dataset().size() == ds.size());

  Dataset extra = random_dataset(rng, 5, 2);
  TrainedGP grown = gp.retrain(extra, {0, 1});

  Dataset merged = ds;
  merged.remove_rows({0, 1});
  for (Eigen::Index i = 0; i < extra.size(); ++i)
    merged.append(extra.X.row(i), extra.y[i], extra.y_var[i]);
  TrainedGP ref = TrainedGP::fit(merged, KernelKind::Matern32, gp.hyper());

  CHECK(grown.dataset().size() == merged.size());
  for (int t = 0; t < 10; ++t) {
    Eigen::VectorXd xs(2);
    xs << rng.uniform(), rng.uniform();
    CHECK(std::abs(grown.predict(xs).mean - ref.predict(xs).mean) < 1e-10);
    CHECK(std::abs(grown.predict(xs).variance - ref.predict(xs).variance) < 1e-10);
  }
}

TEST_CASE("robust cholesky applies jitter to a degenerate matrix") {
  // Two identical rows: singular without jitter.
  Eigen::MatrixXd K(2, 2);
  K << 1.0, 1.0, 1.0, 1.0;
  auto llt = robust_cholesky(K);
  CHECK(llt.info() == Eigen::Success);

  Eigen::MatrixXd bad(2, 2);
  bad << 1.0, 2.0, 2.0, 1.0;  // indefinite beyond any tested jitter
  CHECK_THROWS_AS(robust_cholesky(bad), std::runtime_error);
}
