//! WiNEval-3.0 reference sweeps (2,993 requests, 2x A800 80G) and model cards.
//!
//! Values are stored exactly as published, including the GLM-4 block whose
//! throughput repeats across five levels. Costs are the published two-decimal
//! figures at 1.58 USD/hour.

use super::{BenchmarkRun, Dataset, ModelCard, Sweep};

pub const FIXTURE_DATASET_ID: &str = "wineval3";
pub const FIXTURE_REQUEST_COUNT: u32 = 2993;

// (concurrency, time_s, ttft_s, input, output, total, tok/s, cost_usd)
type Row = (u32, f64, f64, u64, u64, u64, f64, f64);

const SWEEPS: &[(&str, &[Row])] = &[
    (
        "WiNGPT-2.7",
        &[
            (8, 1386.53, 0.119, 1_347_535, 344_068, 1_691_603, 31.02, 0.61),
            (16, 830.37, 0.156, 1_347_535, 345_306, 1_692_841, 25.99, 0.36),
            (32, 561.57, 0.224, 1_347_535, 356_912, 1_704_447, 19.86, 0.25),
            (48, 461.3, 0.295, 1_347_535, 344_281, 1_691_816, 15.55, 0.20),
            (64, 422.36, 0.353, 1_347_535, 345_064, 1_692_599, 12.77, 0.19),
            (128, 378.29, 0.614, 1_347_535, 346_518, 1_694_053, 7.16, 0.17),
        ],
    ),
    (
        "GLM-4-32B",
        &[
            (8, 1583.45, 0.119, 1_226_578, 415_190, 1_641_768, 32.78, 0.69),
            (16, 1694.2, 0.165, 1_226_578, 448_842, 1_675_420, 16.56, 0.74),
            (32, 1268.64, 0.231, 1_226_578, 446_399, 1_672_977, 16.56, 0.56),
            (48, 475.83, 0.303, 1_226_578, 419_237, 1_645_815, 16.56, 0.21),
            (64, 422.93, 0.373, 1_226_578, 410_913, 1_637_491, 16.56, 0.19),
            (128, 420.43, 0.877, 1_226_578, 424_935, 1_651_513, 16.56, 0.18),
        ],
    ),
    (
        "gpt-oss-20b",
        &[
            (8, 781.44, 0.054, 1_495_464, 398_621, 1_894_085, 63.76, 0.34),
            (16, 585.78, 0.042, 1_495_464, 429_743, 1_925_207, 45.85, 0.26),
            (32, 331.56, 0.048, 1_495_464, 396_885, 1_892_349, 37.41, 0.15),
            (48, 259.28, 0.059, 1_495_464, 395_878, 1_891_342, 31.81, 0.11),
            (64, 249.17, 0.073, 1_495_464, 398_699, 1_894_163, 25.00, 0.11),
            (128, 164.17, 0.230, 1_495_464, 388_587, 1_884_051, 18.49, 0.07),
        ],
    ),
    (
        "WiNGPT-3.0",
        &[
            (8, 13593.47, 0.123, 1_347_535, 3_518_378, 4_865_913, 32.35, 5.96),
            (16, 7916.62, 0.142, 1_347_535, 3_440_393, 4_787_928, 27.16, 3.47),
            (32, 6252.95, 0.191, 1_347_535, 3_517_540, 4_865_075, 17.58, 2.74),
            (48, 5925.54, 0.230, 1_347_535, 3_636_012, 4_983_547, 12.78, 2.60),
            (64, 5305.93, 5.219, 1_347_535, 3_736_644, 5_084_179, 11.00, 2.33),
            (128, 4736.77, 57.404, 1_347_535, 3_841_930, 5_189_465, 6.34, 2.08),
        ],
    ),
    (
        "Seed-OSS-36B",
        &[
            (8, 2134.78, 0.168, 1_238_191, 509_206, 1_747_397, 29.82, 0.94),
            (16, 1255.4, 0.222, 1_238_191, 513_012, 1_751_203, 25.54, 0.55),
            (32, 1792.73, 0.337, 1_238_191, 708_137, 1_946_328, 12.34, 0.79),
            (48, 671.64, 0.410, 1_238_191, 506_833, 1_745_024, 15.72, 0.29),
            (64, 629.68, 0.555, 1_238_191, 507_281, 1_745_472, 12.59, 0.28),
            (128, 578.66, 1.195, 1_238_191, 507_014, 1_745_205, 6.85, 0.25),
        ],
    ),
    (
        "medgemma-27b",
        &[
            (8, 5371.46, 0.109, 1_399_753, 1_421_097, 2_820_850, 33.07, 2.36),
            (16, 3706.2, 0.133, 1_399_753, 1_618_060, 3_017_813, 27.29, 1.63),
            (32, 2200.62, 0.190, 1_399_753, 1_411_583, 2_811_336, 20.05, 0.97),
            (48, 2056.75, 0.219, 1_399_753, 1_520_875, 2_920_628, 15.41, 0.90),
            (64, 2006.41, 0.263, 1_399_753, 1_498_920, 2_898_673, 11.67, 0.88),
            (128, 1733.44, 1.201, 1_399_753, 1_418_759, 2_818_512, 6.39, 0.76),
        ],
    ),
    (
        "Mistral-Small",
        &[
            (8, 1938.63, 0.108, 2_113_182, 811_852, 2_925_034, 52.35, 0.85),
            (16, 1117.0, 0.132, 2_113_182, 810_838, 2_924_020, 45.37, 0.49),
            (32, 738.22, 0.173, 2_113_182, 824_301, 2_937_483, 34.89, 0.32),
            (48, 630.79, 0.224, 2_113_182, 811_290, 2_924_472, 26.79, 0.28),
            (64, 559.2, 0.276, 2_113_182, 813_781, 2_926_963, 22.74, 0.25),
            (128, 456.82, 0.539, 2_113_182, 813_335, 2_926_517, 13.91, 0.20),
        ],
    ),
    (
        "Qwen3-30B",
        &[
            (8, 1381.05, 0.067, 1_347_535, 783_226, 2_130_761, 70.89, 0.61),
            (16, 1059.78, 0.093, 1_347_535, 835_127, 2_182_662, 49.25, 0.47),
            (32, 1114.56, 0.123, 1_347_535, 965_555, 2_313_090, 27.07, 0.49),
            (48, 739.24, 0.141, 1_347_535, 848_943, 2_196_478, 23.93, 0.32),
            (64, 616.77, 0.168, 1_347_535, 790_773, 2_138_308, 20.03, 0.27),
            (128, 336.6, 0.450, 1_347_535, 782_911, 2_130_446, 18.17, 0.15),
        ],
    ),
    (
        "WiNGPT-3.5",
        &[
            (8, 2034.05, 0.103, 1_347_535, 932_262, 2_279_797, 57.29, 0.89),
            (16, 1098.77, 0.117, 1_347_535, 762_906, 2_110_441, 43.40, 0.48),
            (32, 863.7, 0.134, 1_347_535, 773_120, 2_120_655, 27.97, 0.38),
            (48, 774.11, 0.147, 1_347_535, 796_836, 2_144_371, 21.45, 0.34),
            (64, 599.03, 0.163, 1_347_535, 714_003, 2_061_538, 18.62, 0.26),
            (128, 668.04, 0.319, 1_347_535, 813_350, 2_160_885, 9.51, 0.29),
        ],
    ),
];

// (model, params_billion, score, notes)
const CARDS: &[(&str, f64, f64, &str)] = &[
    ("WiNGPT-3.5", 30.0, 76.2, ""),
    ("Seed-OSS-36B", 36.0, 72.2, ""),
    ("WiNGPT-3.0", 32.0, 69.6, "reasoning model; long chain-of-thought outputs"),
    ("GLM-4-32B", 32.0, 68.5, "published as GLM-4-32B-0414"),
    ("Qwen3-30B", 30.0, 66.9, ""),
    ("WiNGPT-2.7", 32.0, 65.5, ""),
    ("Mistral-Small", 24.0, 59.8, "tokenizer uses ~2.11M input tokens for the set"),
    ("medgemma-27b", 27.0, 55.9, ""),
    ("gpt-oss-20b", 20.0, 56.4, "published as gpt-oss-20b-low"),
];

/// The embedded reference sweeps (9 models x 6 levels) and model cards.
pub fn canonical_fixture() -> (Vec<Sweep>, Vec<ModelCard>) {
    let sweeps = SWEEPS
        .iter()
        .map(|(model, rows)| {
            let runs = rows
                .iter()
                .map(|&(concurrency, time, ttft, input, output, total, tput, cost)| BenchmarkRun {
                    model_id: (*model).to_string(),
                    concurrency,
                    request_count: FIXTURE_REQUEST_COUNT,
                    total_time_s: time,
                    avg_ttft_s: ttft,
                    input_tokens: input,
                    output_tokens: output,
                    total_tokens: total,
                    avg_throughput_tok_s: tput,
                    cost_usd: Some(cost),
                })
                .collect();
            Sweep::new(*model, runs).expect("embedded fixture is valid")
        })
        .collect();
    let cards = CARDS
        .iter()
        .map(|&(model, params, score, notes)| ModelCard {
            model_id: model.to_string(),
            params_billion: params,
            quality_score: score,
            notes: notes.to_string(),
        })
        .collect();
    (sweeps, cards)
}

pub fn canonical_dataset() -> Dataset {
    let (sweeps, model_cards) = canonical_fixture();
    Dataset { sweeps, model_cards }
}
