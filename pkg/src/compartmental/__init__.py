"""コンパートメントモデル: 開放系/閉鎖系ODE右辺と離散全自由エネルギーの組立。"""
