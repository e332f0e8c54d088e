//! End-to-end run of the compiled binary: four OS processes (TTP, bank, two
//! users) complete a withdraw-pay-deposit cycle over loopback TCP.

use std::net::TcpStream;
use std::path::PathBuf;
use std::process::{Child, Command, Stdio};
use std::time::{Duration, Instant};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_offline-euro")
}

fn port_base() -> u16 {
    // Spread across runs to dodge lingering sockets.
    20000 + (std::process::id() % 20000) as u16
}

/// Waits until the address accepts a connection. The probe connection itself
/// is closed immediately; the serving loops count it as one (empty) session,
/// which the session budgets below account for.
fn wait_listening(addr: &str) {
    let deadline = Instant::now() + Duration::from_secs(30);
    loop {
        match TcpStream::connect(addr) {
            Ok(_) => return,
            Err(_) if Instant::now() < deadline => {
                std::thread::sleep(Duration::from_millis(50));
            }
            Err(e) => panic!("{addr} never came up: {e}"),
        }
    }
}

struct KillOnDrop(Child, &'static str);

impl KillOnDrop {
    fn wait(mut self) {
        let deadline = Instant::now() + Duration::from_secs(60);
        loop {
            match self.0.try_wait().unwrap() {
                Some(status) => {
                    assert!(status.success(), "{} exited with {status}", self.1);
                    std::mem::forget(self);
                    return;
                }
                None if Instant::now() < deadline => {
                    std::thread::sleep(Duration::from_millis(100));
                }
                None => panic!("{} did not exit in time", self.1),
            }
        }
    }
}

impl Drop for KillOnDrop {
    fn drop(&mut self) {
        let _ = self.0.kill();
        let _ = self.0.wait();
    }
}

#[test]
fn multi_process_withdraw_pay_deposit() {
    let base = port_base();
    let ttp_addr = format!("127.0.0.1:{base}");
    let bank_addr = format!("127.0.0.1:{}", base + 1);
    let pay_addr = format!("127.0.0.1:{}", base + 2);
    let params_dir: PathBuf =
        std::env::temp_dir().join(format!("oe-pipeline-{}", std::process::id()));

    let status = Command::new(bin())
        .args(["params", "init", "--seed", "9"])
        .arg("--out")
        .arg(&params_dir)
        .status()
        .unwrap();
    assert!(status.success());

    // Session budgets: one readiness probe each, plus the scripted protocol
    // sessions (ttp: bank registration + one combined fetch/register
    // connection per user; bank: per-user registration, one withdrawal, one
    // deposit; alice: one probe + one payment).
    let ttp = KillOnDrop(
        Command::new(bin())
            .args(["ttp", "serve", "--listen", &ttp_addr, "--sessions", "4"])
            .arg("--params")
            .arg(&params_dir)
            .stdout(Stdio::null())
            .spawn()
            .unwrap(),
        "ttp",
    );
    wait_listening(&ttp_addr);

    let bank = KillOnDrop(
        Command::new(bin())
            .args([
                "bank",
                "serve",
                "--ttp",
                &ttp_addr,
                "--listen",
                &bank_addr,
                "--seed",
                "10",
                "--sessions",
                "5",
            ])
            .stdout(Stdio::null())
            .spawn()
            .unwrap(),
        "bank",
    );
    wait_listening(&bank_addr);

    let alice = KillOnDrop(
        Command::new(bin())
            .args([
                "user",
                "run",
                "--ttp",
                &ttp_addr,
                "--bank",
                &bank_addr,
                "--identity",
                "alice",
                "--seed",
                "11",
                "--withdraw",
                "1",
                "--listen",
                &pay_addr,
                "--serve-payments",
                "2",
            ])
            .stdout(Stdio::null())
            .spawn()
            .unwrap(),
        "alice",
    );
    wait_listening(&pay_addr);

    let bob = Command::new(bin())
        .args([
            "user",
            "run",
            "--ttp",
            &ttp_addr,
            "--bank",
            &bank_addr,
            "--identity",
            "bob",
            "--seed",
            "12",
            "--collect",
            &pay_addr,
            "--deposit",
        ])
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&bob.stdout);
    assert!(bob.status.success(), "bob failed: {stdout}");
    assert!(stdout.contains("collected euro #0 with 1 prior transactions"));
    assert!(
        stdout.contains("Accepted"),
        "deposit not accepted: {stdout}"
    );

    alice.wait();
    bank.wait();
    ttp.wait();
    let _ = std::fs::remove_dir_all(&params_dir);
}
