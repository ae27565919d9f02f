// Copyright 2026 The PBA Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// pba: fit / encode / decode / eval / rdcurve / entropy / sweep.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "pba/allocator.hpp"
#include "pba/codec.hpp"
#include "pba/datastore.hpp"
#include "pba/error.hpp"
#include "pba/harness.hpp"
#include "pba/ntc.hpp"
#include "pba/spectral.hpp"

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Writes to `path`, or stdout when path is empty or "-".
template <class F>
void with_output(const std::string& path, F&& body) {
  if (path.empty() || path == "-") {
    body(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw pba::IoError("cannot open '" + path + "' for writing");
  body(out);
  out.flush();
  if (!out) throw pba::IoError("write failed for '" + path + "'");
}

double snr_db(double P, double mse) {
  return mse > 0.0 ? 10.0 * std::log10(P / mse) : std::numeric_limits<double>::infinity();
}

struct FitArgs {
  std::string input;
  std::optional<double> lambda;
  std::optional<double> target_bits;
  double a = pba::kDefaultA;
  std::uint64_t seed = 0;
  std::string model;
};

void run_fit(const FitArgs& args) {
  const pba::Dataset data = pba::load_dataset(args.input);
  const pba::Trainer trainer(data);
  pba::FitResult fit;
  if (args.target_bits) {
    fit = trainer.fit_target_bits(*args.target_bits, args.a, pba::kDefaultSigma2, args.seed);
  } else {
    const auto base = pba::AllocatorConfig::from_a(1.0, args.a);
    if (!(*args.lambda > 0.0)) throw pba::InvalidArgument("--lambda must be positive");
    fit = trainer.fit(base.with_lambda(pba::AllocatorConfig::reduced_lambda(*args.lambda, base.alpha)),
                      args.seed);
  }
  pba::write_model(fit.model, args.model);

  const double d = static_cast<double>(fit.model.d());
  const double bits = static_cast<double>(fit.model.total_bits()) / d;
  const double mse = fit.allocation.true_mse / d;
  std::printf("active %zu/%zu, rate %.3f bits/dim (%u bits/sample), predicted mse %.6g, "
              "predicted snr %.3f dB\n",
              fit.allocation.active, fit.model.d(), bits, fit.model.total_bits(), mse,
              snr_db(fit.stats.P, mse));
}

struct CodecArgs {
  std::string model;
  std::string input;
  std::string output;
  bool freeze_dither = false;
};

pba::DitherMode dither_mode(bool freeze) {
  return freeze ? pba::DitherMode::kPerComponent : pba::DitherMode::kPerSample;
}

void run_encode(const CodecArgs& args) {
  const pba::PbaModel model = pba::read_model(args.model);
  const pba::Dataset data = pba::load_dataset(args.input);
  if (data.n() > 0 && data.d() != model.d())
    throw pba::InvalidArgument("input has d=" + std::to_string(data.d()) +
                               " but model expects d=" + std::to_string(model.d()));
  const auto records = pba::encode_batch(model, data, dither_mode(args.freeze_dither));
  pba::write_container(pba::make_container(model, records), args.output);
}

void run_decode(const CodecArgs& args) {
  const pba::PbaModel model = pba::read_model(args.model);
  const pba::Container c = pba::read_container(args.input);
  const pba::Dataset rec = pba::decode_container(model, c, dither_mode(args.freeze_dither));
  if (ends_with(args.output, ".csv"))
    pba::write_csv(rec, args.output);
  else
    pba::write_f64bin(rec, args.output);
}

struct EvalArgs {
  std::string original;
  std::string reconstructed;
  std::string clip;
  std::string model;
};

void run_eval(const EvalArgs& args) {
  const pba::Dataset orig = pba::load_dataset(args.original);
  pba::Dataset rec = pba::load_dataset(args.reconstructed);
  if (!args.clip.empty()) rec = pba::apply_clip(rec, pba::parse_clip(args.clip));
  double rate = std::numeric_limits<double>::quiet_NaN();
  if (!args.model.empty()) {
    const pba::PbaModel model = pba::read_model(args.model);
    rate = static_cast<double>(model.total_bits()) / static_cast<double>(model.d());
  }
  const double P = pba::fit_stats(orig).P;
  const pba::EvalReport r = pba::evaluate(orig, rec, P, rate);
  std::cout << "rate_bits_per_dim,mse,snr_db,n\n"
            << pba::format_double(r.rate_bits_per_dim) << ',' << pba::format_double(r.mse)
            << ',' << pba::format_double(r.snr_db) << ',' << r.n << '\n';
}

struct RdCurveArgs {
  std::string input;
  std::string lambdas;
  std::string baseline = "pca";
  int gain_bits = 16;
  double a = pba::kDefaultA;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
  std::string out;
};

void run_rdcurve(const RdCurveArgs& args) {
  if (args.baseline != "pca" && args.baseline != "none")
    throw pba::InvalidArgument("--baseline must be 'pca' or 'none'");
  pba::RdCurveOptions opts;
  opts.a = args.a;
  opts.seed = args.seed;
  opts.train_fraction = args.train_fraction;
  opts.include_pca = args.baseline == "pca";
  opts.gain_bits = args.gain_bits;
  const auto lambdas = pba::parse_geom_grid(args.lambdas);
  const auto rows = pba::run_rdcurve(pba::load_dataset(args.input), lambdas, opts);
  with_output(args.out, [&](std::ostream& os) { pba::write_rdcurve_csv(os, rows); });
}

struct EntropyArgs {
  std::string grid;
  std::string out;
};

void run_entropy(const EntropyArgs& args) {
  const auto s = pba::parse_geom_grid(args.grid);
  const auto grid = pba::entropy_grid(s);
  with_output(args.out, [&](std::ostream& os) { pba::write_entropy_csv(os, grid); });
}

struct SweepArgs {
  std::string input;
  std::string lambdas;
  double a = pba::kDefaultA;
  bool selected = false;
  std::string out;
};

void run_sweep(const SweepArgs& args) {
  const pba::Dataset data = pba::load_dataset(args.input);
  const pba::Spectrum spectrum = pba::eigendecompose(pba::fit_stats(data).K);
  const auto base = pba::AllocatorConfig::from_a(1.0, args.a);
  std::vector<double> lambdas;
  for (double lt : pba::parse_geom_grid(args.lambdas))
    lambdas.push_back(pba::AllocatorConfig::reduced_lambda(lt, base.alpha));
  const pba::RDSweep sweep = pba::rd_sweep(spectrum, base, lambdas);
  with_output(args.out, [&](std::ostream& os) {
    pba::write_rd_sweep_csv(os, args.selected ? sweep.selected : sweep.frontier, spectrum, base);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Principal Bit Analysis fixed-rate compressor"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model and write it as PBAM");
  fit_cmd->add_option("--input", fit.input, "Training data (CSV or PBADATA)")->required();
  auto* lambda_opt =
      fit_cmd->add_option("--lambda", fit.lambda, "Price of one nat of rate in MSE units");
  auto* target_opt =
      fit_cmd->add_option("--target-bits", fit.target_bits, "Target rate in bits/dim");
  lambda_opt->excludes(target_opt);
  fit_cmd->add_option("--a", fit.a, "Quantizer range parameter")->capture_default_str();
  fit_cmd->add_option("--seed", fit.seed, "Dither seed")->capture_default_str();
  fit_cmd->add_option("--model", fit.model, "Output model path")->required();

  CodecArgs enc;
  auto* enc_cmd = app.add_subcommand("encode", "Encode a dataset into a PBAC container");
  enc_cmd->add_option("--model", enc.model)->required();
  enc_cmd->add_option("--input", enc.input)->required();
  enc_cmd->add_option("--output", enc.output)->required();
  enc_cmd->add_flag("--freeze-dither", enc.freeze_dither, "One dither value per component");

  CodecArgs dec;
  auto* dec_cmd = app.add_subcommand("decode", "Decode a PBAC container");
  dec_cmd->add_option("--model", dec.model)->required();
  dec_cmd->add_option("--input", dec.input)->required();
  dec_cmd->add_option("--output", dec.output, "PBADATA, or CSV when ending in .csv")
      ->required();
  dec_cmd->add_flag("--freeze-dither", dec.freeze_dither, "One dither value per component");

  EvalArgs ev;
  auto* eval_cmd = app.add_subcommand("eval", "Report MSE and SNR of a reconstruction");
  eval_cmd->add_option("--original", ev.original)->required();
  eval_cmd->add_option("--reconstructed", ev.reconstructed)->required();
  eval_cmd->add_option("--clip", ev.clip, "lo,hi[,round] applied to the reconstruction");
  eval_cmd->add_option("--model", ev.model, "Model whose rate is reported");

  RdCurveArgs rd;
  auto* rd_cmd = app.add_subcommand("rdcurve", "Held-out rate/SNR curve for PBA and PCA");
  rd_cmd->add_option("--input", rd.input)->required();
  rd_cmd->add_option("--lambdas", rd.lambdas, "geom:lo:hi:n")->required();
  rd_cmd->add_option("--baseline", rd.baseline, "pca or none")->capture_default_str();
  rd_cmd->add_option("--gain-bits", rd.gain_bits)->capture_default_str();
  rd_cmd->add_option("--a", rd.a)->capture_default_str();
  rd_cmd->add_option("--seed", rd.seed)->capture_default_str();
  rd_cmd->add_option("--train-fraction", rd.train_fraction)->capture_default_str();
  rd_cmd->add_option("--out", rd.out, "Output CSV (stdout if omitted)");

  EntropyArgs en;
  auto* en_cmd = app.add_subcommand("entropy", "Tabulate rho(s) and Fisher information");
  en_cmd->add_option("--s-grid", en.grid, "geom:lo:hi:n")->required();
  en_cmd->add_option("--out", en.out, "Output CSV (stdout if omitted)");

  SweepArgs sw;
  auto* sw_cmd = app.add_subcommand("sweep", "Analytic rate-distortion sweep");
  sw_cmd->add_option("--input", sw.input)->required();
  sw_cmd->add_option("--lambdas", sw.lambdas, "geom:lo:hi:n")->required();
  sw_cmd->add_option("--a", sw.a)->capture_default_str();
  sw_cmd->add_flag("--selected", sw.selected, "Per-lambda points instead of the frontier");
  sw_cmd->add_option("--out", sw.out, "Output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: usage: " << e.what() << '\n';
    return 2;
  }

  try {
    if (fit_cmd->parsed()) {
      if (!fit.lambda && !fit.target_bits)
        throw pba::InvalidArgument("fit needs --lambda or --target-bits");
      run_fit(fit);
    } else if (enc_cmd->parsed()) {
      run_encode(enc);
    } else if (dec_cmd->parsed()) {
      run_decode(dec);
    } else if (eval_cmd->parsed()) {
      run_eval(ev);
    } else if (rd_cmd->parsed()) {
      run_rdcurve(rd);
    } else if (en_cmd->parsed()) {
      run_entropy(en);
    } else if (sw_cmd->parsed()) {
      run_sweep(sw);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
