use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wpcn_auction::auction::{allocate_soft, ic_regret, run_hard_auction, spa_baseline};
use wpcn_auction::AuctionNetParams;

fn net(seed: u64, bidders: usize) -> AuctionNetParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    AuctionNetParams::random(&mut rng, bidders, 3, 4, 1.0, 0.5)
}

proptest! {
    #[test]
    fn inverse_undoes_transform(seed in any::<u64>(), b in 0.0f64..=1.5) {
        let p = net(seed, 1);
        prop_assert!((p.inverse_transform(0, p.transform(0, b)) - b).abs() < 1e-9);
    }

    #[test]
    fn transform_strictly_increasing(seed in any::<u64>(), a in 0.0f64..1.5, gap in 1e-6f64..0.5) {
        let p = net(seed, 1);
        prop_assert!(p.transform(0, a) < p.transform(0, a + gap));
    }

    #[test]
    fn allocation_is_a_distribution(
        t in proptest::collection::vec(-2.0f64..2.0, 2..12),
        kappa in 0.1f64..5000.0,
    ) {
        let z = allocate_soft(&t, kappa);
        prop_assert!(z.iter().all(|&p| p >= 0.0));
        prop_assert!((z.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn hard_auction_is_ir(seed in any::<u64>(), bids in proptest::collection::vec(0.0f64..1.0, 4)) {
        let p = net(seed, 4);
        let out = run_hard_auction(&p, &bids);
        match out.winner {
            Some(w) => prop_assert!(out.payment >= 0.0 && out.payment <= bids[w] + 1e-12),
            None => prop_assert_eq!(out.payment, 0.0),
        }
    }

    #[test]
    fn spa_winner_pays_at_most_its_bid(bids in proptest::collection::vec(0.0f64..1.0, 2..10)) {
        let (w, pay) = spa_baseline(&bids);
        prop_assert!(bids.iter().all(|&b| b <= bids[w]));
        prop_assert!(pay <= bids[w]);
    }
}

#[test]
fn random_nets_admit_no_profitable_misreport() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let grid: Vec<f64> = (0..=200).map(|i| 1.2 * i as f64 / 200.0).collect();
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = AuctionNetParams::random(&mut rng, 5, 3, 4, 1.0, 0.5);
        let bids: Vec<f64> = (0..5).map(|_| rng.random_range(0.0..1.0)).collect();
        for bidder in 0..5 {
            worst = worst.max(ic_regret(&p, &bids, bidder, &grid));
        }
    }
    assert!(worst <= 1e-9, "regret {worst}");
}

#[test]
fn identity_winner_ignores_temperature() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    let p = AuctionNetParams::identity(6, 5, 10);
    for _ in 0..1000 {
        let bids: Vec<f64> = (0..6).map(|_| rng.random_range(0.0..1.0)).collect();
        let hard = run_hard_auction(&p, &bids);
        for kappa in [1.0, 100.0, 1e4] {
            let soft = wpcn_auction::auction::forward(&p, &bids, kappa);
            let top = (0..soft.alloc.len()).fold(0, |best, i| {
                if soft.alloc[i] > soft.alloc[best] {
                    i
                } else {
                    best
                }
            });
            assert_eq!(Some(top), hard.winner);
            assert_eq!(soft.winner, top);
        }
    }
}
