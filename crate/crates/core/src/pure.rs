//! Pure Nash equilibria by exhaustive best-response checking.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{ActionProfile, Game};
use crate::scalar::Scalar;

pub const DEFAULT_PROFILE_CAP: u128 = 10_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PureEquilibriumSet {
    /// Sorted lexicographically by per-player action index.
    pub profiles: Vec<ActionProfile>,
    pub game_fingerprint: u64,
}

impl PureEquilibriumSet {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }
}

/// Actions of `player` maximizing its utility with the other coordinates of
/// `profile` fixed, in action order.
pub fn best_responses<T: Scalar>(game: &Game<T>, player: usize, profile: &ActionProfile) -> Result<Vec<usize>> {
    if player >= game.num_players() {
        return Err(Error::UnknownPlayer(format!("#{player}")));
    }
    game.check_profile(profile)?;
    Ok(best_responses_unchecked(game, player, &profile.0))
}

pub(crate) fn best_responses_unchecked<T: Scalar>(game: &Game<T>, player: usize, profile: &[usize]) -> Vec<usize> {
    let mut probe = profile.to_vec();
    let values: Vec<T> = (0..game.num_actions(player))
        .map(|a| {
            probe[player] = a;
            game.utility_unchecked(player, &probe).clone()
        })
        .collect();
    let best = values.iter().max().expect("players have actions");
    (0..values.len()).filter(|&a| &values[a] == best).collect()
}

pub fn is_pure_equilibrium<T: Scalar>(game: &Game<T>, profile: &ActionProfile) -> Result<bool> {
    game.check_profile(profile)?;
    Ok(is_equilibrium_unchecked(game, &profile.0))
}

fn is_equilibrium_unchecked<T: Scalar>(game: &Game<T>, profile: &[usize]) -> bool {
    let mut probe = profile.to_vec();
    (0..game.num_players()).all(|i| {
        let current = game.utility_unchecked(i, profile).clone();
        let own = profile[i];
        let stable = (0..game.num_actions(i)).all(|a| {
            probe[i] = a;
            game.utility_unchecked(i, &probe) <= &current
        });
        probe[i] = own;
        stable
    })
}

/// Every pure equilibrium, in lexicographic profile order.
pub fn enumerate_pure_equilibria<T: Scalar>(game: &Game<T>, profile_cap: u128) -> Result<PureEquilibriumSet> {
    let total = game.profile_count();
    if total > profile_cap {
        return Err(Error::ProfileCap {
            profiles: total,
            cap: profile_cap,
        });
    }
    let n = game.num_players();
    let mut profiles = Vec::new();
    let mut current = vec![0usize; n];
    if n > 0 {
        loop {
            if is_equilibrium_unchecked(game, &current) {
                profiles.push(ActionProfile(current.clone()));
            }
            // odometer with the last player varying fastest
            let mut k = n;
            loop {
                if k == 0 {
                    return Ok(PureEquilibriumSet {
                        profiles,
                        game_fingerprint: game.fingerprint(),
                    });
                }
                k -= 1;
                current[k] += 1;
                if current[k] < game.num_actions(k) {
                    break;
                }
                current[k] = 0;
            }
        }
    }
    // the empty profile of a player-less game is vacuously stable
    profiles.push(ActionProfile(Vec::new()));
    Ok(PureEquilibriumSet {
        profiles,
        game_fingerprint: game.fingerprint(),
    })
}
