"""データ層: 仕様ファイルの読込・検証と軌道の出力。"""
